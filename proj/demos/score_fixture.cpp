// Scores a JSONL batch, expands it once and prints the volume change.
#include <cstdio>
#include <iostream>

#include "gass/gass.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "demos/fixtures/small_batch.jsonl";
  try {
    const auto file = gass::io::read_embeddings(path);
    for (const auto& w : file.warnings) std::cerr << "warning: " << w << "\n";
    const auto& batch = file.batch;
    const int n = gass::effective_candidates(gass::kDefaultCandidates, static_cast<int>(batch.dim()));
    const auto basis = gass::identify_residual_basis(batch, n, 1);
    const auto spread = gass::spread_score(batch, basis.u_ind);
    std::printf("B=%zu d=%ld  D_dep=%.6f D_ind=%.6f SPP=%.6f  VS=%.6f  align=%.6f\n", batch.size(),
                static_cast<long>(batch.dim()), spread.d_dep, spread.d_ind, spread.spp,
                gass::vendi_score(batch), gass::alignment_score(batch));

    const auto expanded = gass::expand(batch, basis.u_ind, {0.05, 0.05, true, 2});
    std::vector<gass::Vector> before;
    for (const auto& m : batch.members) before.push_back(m.coords());
    if (batch.size() <= static_cast<std::size_t>(batch.dim()) + 1)
      std::printf("simplex volume %.6g -> %.6g\n", gass::volume::simplex_volume(before),
                  gass::volume::simplex_volume(expanded.targets));
  } catch (const gass::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
