#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gass/gass.hpp"

namespace gass::cli {

namespace fs = std::filesystem;
using io::json;

// Config values pass through their 12-digit text form before a run, so a
// manifest snapshot replays the exact same numbers.
inline io::RunConfig canonical_config(const io::RunConfig& cfg) {
  return io::config_from_json(json::parse(io::to_canonical_json(io::config_to_json(cfg))));
}

inline std::string read_back(const fs::path& p) { return io::read_text_file(p.string()); }

inline void hash_outputs(io::RunManifest& m, const fs::path& dir, const std::vector<std::string>& names) {
  for (const auto& n : names) m.outputs[n] = io::sha256_hex(read_back(dir / n));
}

inline std::string label_for(bool gass) { return gass ? "gass" : "vanilla"; }

/// Toy generation into `dir`: report, embeddings, raw samples, plot, manifest.
inline io::RunManifest run_sample(io::RunConfig cfg, const fs::path& dir) {
  cfg = canonical_config(cfg);
  const auto model = io::build_model(cfg);
  std::optional<GassOptions> gass;
  if (cfg.gass) gass = io::gass_options(cfg);
  const auto result = sample_batch(model, cfg.batch_size, gass, cfg.seed);
  const auto& rec = result.record;
  fs::create_directories(dir);

  const std::string label = label_for(cfg.gass);
  io::MetricsReport report;
  report.runs.push_back(io::run_metrics(label, cfg.seed, cfg.gass, rec.final_metrics));
  report.series = io::step_series(label, rec);
  io::write_report(report, (dir / "report.json").string());

  std::vector<std::string> ids;
  std::vector<Vector> coords;
  for (std::size_t i = 0; i < rec.final_embeddings.size(); ++i) {
    ids.push_back("sample" + std::to_string(i));
    coords.push_back(rec.final_embeddings[i].coords());
  }
  io::write_embeddings((dir / "embeddings.jsonl").string(), ids, coords, "anchor",
                       model.anchor.vector.coords());
  io::write_text_file((dir / "samples.csv").string(), io::format_samples_csv(result.samples));
  io::write_text_file((dir / "projections.svg").string(),
                      io::render_projections(io::projection_series(report), label + " batch projections"));

  io::RunManifest m;
  m.command = "sample";
  m.config = cfg;
  m.seed_first = m.seed_last = cfg.seed;
  m.effective_candidates = effective_candidates(cfg.n_candidates, cfg.embed_dim);
  m.timestamp = io::utc_timestamp();
  hash_outputs(m, dir, {"embeddings.jsonl", "projections.svg", "report.json", "samples.csv"});
  io::write_manifest(m, (dir / "manifest.json").string());
  return m;
}

struct MeanStd {
  double mean = 0.0, stddev = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

struct PairedRun {
  std::uint64_t seed = 0;
  RunRecord vanilla, gass;
};

/// Vanilla and GASS runs for every seed in [first, last]. Seeds are spread
/// over `jobs` worker threads; results come back in seed order.
inline std::vector<PairedRun> run_pairs(const io::RunConfig& cfg, std::uint64_t first, std::uint64_t last,
                                        unsigned jobs) {
  const auto model = io::build_model(cfg);
  const auto options = io::gass_options(cfg);
  const std::size_t n = static_cast<std::size_t>(last - first + 1);
  std::vector<PairedRun> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        const std::uint64_t seed = first + i;
        out[i].seed = seed;
        out[i].vanilla = sample_batch(model, cfg.batch_size, std::nullopt, seed).record;
        out[i].gass = sample_batch(model, cfg.batch_size, options, seed).record;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

inline json metrics_row(const BatchMetrics& m) {
  return {{"spp", m.d_dep + m.d_ind}, {"d_dep", m.d_dep}, {"d_ind", m.d_ind},
          {"vendi", m.vendi},         {"alignment", m.alignment}};
}

/// Paired vanilla/GASS comparison written to `dir`; the mean +- std table
/// goes to `table`.
inline io::RunManifest run_compare(io::RunConfig cfg, std::uint64_t first, std::uint64_t last,
                                   unsigned jobs, const fs::path& dir, std::ostream& table) {
  if (last < first) throw Error(ErrorKind::InvalidArgument, "seed range must be ascending");
  cfg = canonical_config(cfg);
  const auto pairs = run_pairs(cfg, first, last, jobs);
  fs::create_directories(dir);

  io::MetricsReport report;
  json rows = json::array();
  std::vector<double> spp_v, spp_g, vs_v, vs_g, al_v, al_g, rel;
  int wins = 0;
  for (const auto& p : pairs) {
    report.runs.push_back(io::run_metrics("vanilla seed " + std::to_string(p.seed), p.seed, false,
                                          p.vanilla.final_metrics));
    report.runs.push_back(
        io::run_metrics("gass seed " + std::to_string(p.seed), p.seed, true, p.gass.final_metrics));
    const auto series = io::step_series("gass seed " + std::to_string(p.seed), p.gass);
    report.series.insert(report.series.end(), series.begin(), series.end());

    const auto& v = p.vanilla.final_metrics;
    const auto& g = p.gass.final_metrics;
    spp_v.push_back(v.d_dep + v.d_ind);
    spp_g.push_back(g.d_dep + g.d_ind);
    vs_v.push_back(v.vendi);
    vs_g.push_back(g.vendi);
    al_v.push_back(v.alignment);
    al_g.push_back(g.alignment);
    if (spp_g.back() > spp_v.back()) ++wins;
    rel.push_back(spp_v.back() > 0.0 ? (spp_g.back() - spp_v.back()) / spp_v.back() : 0.0);
    rows.push_back({{"seed", std::to_string(p.seed)},
                    {"vanilla", metrics_row(v)},
                    {"gass", metrics_row(g)}});
  }

  const std::vector<std::pair<std::string, std::pair<MeanStd, MeanStd>>> table_rows = {
      {"spp", {mean_std(spp_v), mean_std(spp_g)}},
      {"vendi", {mean_std(vs_v), mean_std(vs_g)}},
      {"alignment", {mean_std(al_v), mean_std(al_g)}}};
  json summary = json::object();
  for (const auto& [name, ms] : table_rows) {
    summary[name + "_vanilla_mean"] = ms.first.mean;
    summary[name + "_vanilla_std"] = ms.first.stddev;
    summary[name + "_gass_mean"] = ms.second.mean;
    summary[name + "_gass_std"] = ms.second.stddev;
  }
  summary["seeds"] = static_cast<double>(pairs.size());
  summary["spp_wins"] = static_cast<double>(wins);
  summary["spp_mean_relative_increase"] = mean_std(rel).mean;
  for (const auto& [k, v] : summary.items()) report.summary[k] = v.get<double>();

  io::write_report(report, (dir / "report.json").string());
  io::write_text_file((dir / "compare.json").string(),
                      io::to_canonical_json({{"rows", rows}, {"summary", summary}}));
  io::write_text_file(
      (dir / "projections.svg").string(),
      io::render_projections({{"vanilla", pairs.front().vanilla.final_metrics.proj_coords},
                              {"gass", pairs.front().gass.final_metrics.proj_coords}},
                             "seed " + std::to_string(first) + ": vanilla vs gass"));

  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %-26s %s\n", "metric", "vanilla (mean +- std)", "gass (mean +- std)");
  table << buf;
  for (const auto& [name, ms] : table_rows) {
    const auto cell = [](const MeanStd& x) {
      char c[64];
      std::snprintf(c, sizeof c, "%.6g +- %.3g", x.mean, x.stddev);
      return std::string(c);
    };
    std::snprintf(buf, sizeof buf, "%-10s %-26s %s\n", name.c_str(), cell(ms.first).c_str(),
                  cell(ms.second).c_str());
    table << buf;
  }
  table << "spp wins: " << wins << "/" << pairs.size()
        << ", mean relative spp increase: " << io::format_number(mean_std(rel).mean) << "\n";

  io::RunManifest m;
  m.command = "compare";
  m.config = cfg;
  m.seed_first = first;
  m.seed_last = last;
  m.effective_candidates = effective_candidates(cfg.n_candidates, cfg.embed_dim);
  m.timestamp = io::utc_timestamp();
  hash_outputs(m, dir, {"compare.json", "projections.svg", "report.json"});
  io::write_manifest(m, (dir / "manifest.json").string());
  return m;
}

inline std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const auto v = std::stoull(s);
      return {v, v};
    }
    return {std::stoull(s.substr(0, dots)), std::stoull(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--seeds", "expected S1..S2, got '" + s + "'");
  }
}

inline io::EmbeddingFile load_batch(const std::string& path, std::ostream& err) {
  auto file = io::read_embeddings(path);
  for (const auto& w : file.warnings) err << "warning: " << w << "\n";
  return file;
}

inline int default_candidates(std::optional<int> requested, const io::EmbeddingFile& f) {
  return requested ? *requested : effective_candidates(kDefaultCandidates, static_cast<int>(f.batch.dim()));
}

inline json basis_json(const ResidualBasis& basis) {
  return {{"u_ind", std::vector<double>(basis.u_ind.coords().data(),
                                        basis.u_ind.coords().data() + basis.u_ind.dim())},
          {"index", basis.index},
          {"energies", basis.candidates.energies}};
}

/// Entry point shared by the executable and the tests. Exit codes: 0 on
/// success, 1 on a failed verifier or runtime error, 2 on usage errors.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Spherical spread scoring, GASS expansion and toy generation", "gass"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", io::kToolVersion);

  std::string input, out_path, plot_path, config_path, seeds, verifier;
  std::optional<int> n_candidates;
  std::uint64_t seed = 0;
  double r_dep = kDefaultExpansionRange, r_ind = kDefaultExpansionRange;
  bool no_renorm = false, use_gass = false;
  std::optional<std::size_t> trials;
  std::optional<int> dim;
  int subspace = 5, batch_size = 4, input_dim = 12;
  double r = 0.05, spread = 0.2;
  std::vector<std::string> overrides;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

  auto* score = app.add_subcommand("score", "Spread, Vendi and alignment scores of a batch");
  score->add_option("embeddings", input, "JSONL embeddings file")->required();
  score->add_option("--n-candidates", n_candidates, "Residual candidates (default min(10, d-1))");
  score->add_option("--seed", seed, "Candidate seed");
  score->add_option("--out", out_path, "Write a metrics report here");
  score->add_option("--plot", plot_path, "Write a projection SVG here");

  auto* basis = app.add_subcommand("basis", "Dominant residual basis and candidate energies");
  basis->add_option("embeddings", input, "JSONL embeddings file")->required();
  basis->add_option("--n-candidates", n_candidates, "Residual candidates (default min(10, d-1))");
  basis->add_option("--seed", seed, "Candidate seed");

  auto* expand_cmd = app.add_subcommand("expand", "Expanded target embeddings");
  expand_cmd->add_option("embeddings", input, "JSONL embeddings file")->required();
  expand_cmd->add_option("--r-dep", r_dep, "Range of the e_t shift")->required();
  expand_cmd->add_option("--r-ind", r_ind, "Range of the u_ind shift")->required();
  expand_cmd->add_flag("--no-renorm", no_renorm, "Keep targets off the sphere");
  expand_cmd->add_option("--n-candidates", n_candidates, "Residual candidates (default min(10, d-1))");
  expand_cmd->add_option("--seed", seed, "Seed for candidates and shifts")->required();
  expand_cmd->add_option("--out", out_path, "Target JSONL file")->required();

  auto* verify = app.add_subcommand("verify", "Run a property verifier; exit 0 iff it passes");
  verify->add_option("name", verifier, "prop41 | thm-a2 | lemma-a1 | gradcheck")
      ->required()
      ->check(CLI::IsMember({"prop41", "thm-a2", "lemma-a1", "gradcheck"}));
  verify->add_option("--trials", trials, "Trials (or gradient cases)");
  verify->add_option("--dim", dim, "Dimension (embedding dimension for gradcheck)");
  verify->add_option("--seed", seed, "Seed");
  verify->add_option("--subspace", subspace, "lemma-a1 subspace dimension");
  verify->add_option("--batch-size", batch_size, "prop41 batch size");
  verify->add_option("--r", r, "prop41 expansion range (both axes)");
  verify->add_option("--spread", spread, "prop41 batch spread around the anchor");
  verify->add_option("--input-dim", input_dim, "gradcheck input dimension");
  verify->add_option("--out", out_path, "Write the report here as well");

  auto* sample = app.add_subcommand("sample", "Toy generation with or without GASS");
  sample->add_flag("--gass", use_gass, "Enable GASS");
  sample->add_option("--config", config_path, "TOML run config");
  sample->add_option("--set", overrides, "Override a config key (key=value)");
  auto* sample_seed = sample->add_option("--seed", seed, "Run seed")->required();
  sample->add_option("--out", out_path, "Output directory")->required();

  auto* compare = app.add_subcommand("compare", "Paired vanilla/GASS runs over a seed range");
  compare->add_option("--seeds", seeds, "Seed range S1..S2")->required();
  compare->add_option("--config", config_path, "TOML run config");
  compare->add_option("--set", overrides, "Override a config key (key=value)");
  compare->add_option("--out", out_path, "Output directory")->required();
  compare->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* replay = app.add_subcommand("replay", "Rerun a manifest and check the output hashes");
  replay->add_option("manifest", input, "manifest.json of a sample or compare run")->required();
  replay->add_option("--out", out_path, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (score->parsed()) {
      const auto file = load_batch(input, err);
      const auto rb = identify_residual_basis(file.batch, default_candidates(n_candidates, file), seed);
      const auto sp = spread_score(file.batch, rb.u_ind);
      io::MetricsReport report;
      report.runs.push_back(
          io::run_metrics(input, sp, vendi_score(file.batch), alignment_score(file.batch), rb.index));
      const auto text = io::format_report(report);
      if (!out_path.empty()) io::write_text_file(out_path, text);
      else out << text;
      if (!plot_path.empty()) io::plot_projections(sp, plot_path);
      return 0;
    }
    if (basis->parsed()) {
      const auto file = load_batch(input, err);
      const auto rb = identify_residual_basis(file.batch, default_candidates(n_candidates, file), seed);
      out << io::to_canonical_json(basis_json(rb));
      return 0;
    }
    if (expand_cmd->parsed()) {
      const auto file = load_batch(input, err);
      const auto rb = identify_residual_basis(file.batch, default_candidates(n_candidates, file),
                                              derive_seed(seed, {stream::kBasis}));
      const auto ex = expand(file.batch, rb.u_ind, {r_dep, r_ind, !no_renorm, seed});
      io::write_embeddings(out_path, file.ids, ex.targets, file.anchor_id, file.batch.anchor.coords());
      return 0;
    }
    if (verify->parsed()) {
      volume::VerifierReport rep;
      if (verifier == "thm-a2") {
        rep = volume::verify_determinant_monotonicity(dim.value_or(6), trials.value_or(10000), seed);
      } else if (verifier == "lemma-a1") {
        rep = volume::verify_projection_commutativity(dim.value_or(32), subspace, trials.value_or(1000), seed);
      } else if (verifier == "prop41") {
        volume::VolumeExpansionConfig cfg;
        cfg.batch_size = batch_size;
        cfg.dim = dim.value_or(16);
        cfg.params = {r, r, true, 0};
        cfg.spread = spread;
        cfg.seed = seed;
        rep = volume::verify_volume_expansion(cfg, trials.value_or(1000));
      } else {
        rep = verify_encode_gradient(input_dim, dim.value_or(8), trials.value_or(100), seed);
      }
      io::MetricsReport report;
      report.verifiers.push_back(rep);
      const auto text = io::format_report(report);
      out << text;
      if (!out_path.empty()) io::write_text_file(out_path, text);
      if (!rep.pass) err << "verifier " << rep.name << " failed\n";
      return rep.pass ? 0 : 1;
    }
    if (sample->parsed() || compare->parsed()) {
      io::RunConfig cfg = config_path.empty() ? io::RunConfig{} : io::load_config(config_path);
      for (const auto& o : overrides) io::apply_override(cfg, o);
      if (sample->parsed()) {
        if (use_gass) cfg.gass = true;
        if (sample_seed->count()) cfg.seed = seed;
        run_sample(cfg, out_path);
        err << "wrote " << out_path << "\n";
        return 0;
      }
      const auto [first, last] = parse_seed_range(seeds);
      run_compare(cfg, first, last, jobs, out_path, out);
      return 0;
    }
    if (replay->parsed()) {
      const auto original = io::read_manifest(input);
      const auto fresh = original.command == "sample"
                             ? run_sample(original.config, out_path)
                             : original.command == "compare"
                                   ? run_compare(original.config, original.seed_first, original.seed_last,
                                                 jobs, out_path, err)
                                   : throw Error(ErrorKind::ParseError,
                                                 "manifest command must be sample or compare");
      int mismatches = 0;
      for (const auto& [name, hash] : original.outputs) {
        const auto it = fresh.outputs.find(name);
        const bool same = it != fresh.outputs.end() && it->second == hash;
        out << (same ? "identical " : "DIFFERENT ") << name << "\n";
        if (!same) ++mismatches;
      }
      return mismatches == 0 ? 0 : 1;
    }
  } catch (const CLI::ValidationError& e) {
    err << e.what() << "\n" << app.help();
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace gass::cli
