#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gass/diversity.hpp"
#include "gass/error.hpp"
#include "gass/io/canonical_json.hpp"
#include "gass/sphere.hpp"

namespace gass::io {

inline constexpr double kNormWarningThreshold = 1e-6;

/// A batch loaded from JSON Lines, with the per-line ids kept for output.
struct EmbeddingFile {
  EmbeddingBatch batch;
  std::vector<std::string> ids;
  std::string anchor_id;
  std::vector<std::string> warnings;
};

/// One object per line: {"id": "...", "embedding": [...]}; the single line
/// with "role": "anchor" is e_t. Blank lines are skipped. Vectors are
/// normalized on load and a warning is recorded when an input norm is off
/// by more than 1e-6.
inline EmbeddingFile parse_embeddings(std::istream& in, const std::string& source = "<input>") {
  EmbeddingFile out;
  std::optional<Embedding> anchor;
  Eigen::Index dim = -1;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](ErrorKind kind, const std::string& why) {
    return Error(kind, source + ":" + std::to_string(line_no) + ": " + why);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw fail(ErrorKind::ParseError, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw fail(ErrorKind::ParseError, "expected a JSON object");
    if (!obj.contains("embedding") || !obj["embedding"].is_array())
      throw fail(ErrorKind::ParseError, "missing \"embedding\" array");
    const auto& arr = obj["embedding"];
    Vector v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t k = 0; k < arr.size(); ++k) {
      if (!arr[k].is_number()) throw fail(ErrorKind::ParseError, "non-numeric embedding entry");
      v[static_cast<Eigen::Index>(k)] = arr[k].get<double>();
    }
    if (!v.allFinite()) throw fail(ErrorKind::ParseError, "non-finite embedding entry");
    if (dim < 0) dim = v.size();
    if (v.size() != dim)
      throw fail(ErrorKind::DimensionMismatch, "dimension " + std::to_string(v.size()) +
                                                   " differs from " + std::to_string(dim));
    std::string id = "line" + std::to_string(line_no);
    if (obj.contains("id")) {
      if (!obj["id"].is_string()) throw fail(ErrorKind::ParseError, "\"id\" must be a string");
      id = obj["id"].get<std::string>();
    }
    const double norm = v.norm();
    if (std::abs(norm - 1.0) > kNormWarningThreshold)
      out.warnings.push_back(source + ":" + std::to_string(line_no) + ": norm " +
                             format_number(norm) + " renormalized to 1");
    Embedding e;
    try {
      e = normalize(v);
    } catch (const Error& err) {
      throw fail(err.kind(), err.what());
    }

    const bool is_anchor = obj.contains("role") && obj["role"] == "anchor";
    if (is_anchor) {
      if (anchor) throw fail(ErrorKind::DuplicateAnchor, "second anchor line");
      anchor = std::move(e);
      out.anchor_id = id;
    } else {
      out.batch.members.push_back(std::move(e));
      out.ids.push_back(std::move(id));
    }
  }
  if (!anchor) throw Error(ErrorKind::MissingAnchor, source + ": no line with \"role\": \"anchor\"");
  if (out.batch.members.empty())
    throw Error(ErrorKind::InvalidArgument, source + ": no member embeddings");
  out.batch.anchor = std::move(*anchor);
  return out;
}

inline EmbeddingFile read_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  return parse_embeddings(in, path);
}

inline std::string embedding_line(const std::string& id, const Vector& v, bool anchor) {
  std::string s = "{\"embedding\": [";
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) s += ", ";
    s += format_number(v[k]);
  }
  s += "], \"id\": " + json(id).dump();
  if (anchor) s += ", \"role\": \"anchor\"";
  s += "}\n";
  return s;
}

/// Anchor line first, then one line per member.
inline std::string format_embeddings(const std::vector<std::string>& ids,
                                     const std::vector<Vector>& members, const std::string& anchor_id,
                                     const Vector& anchor) {
  if (ids.size() != members.size())
    throw Error(ErrorKind::LengthMismatch, "one id per embedding required");
  std::string out = embedding_line(anchor_id, anchor, true);
  for (std::size_t i = 0; i < members.size(); ++i) out += embedding_line(ids[i], members[i], false);
  return out;
}

inline void write_embeddings(const std::string& path, const std::vector<std::string>& ids,
                             const std::vector<Vector>& members, const std::string& anchor_id,
                             const Vector& anchor) {
  write_text_file(path, format_embeddings(ids, members, anchor_id, anchor));
}

/// Raw toy samples as CSV: id,x0,...,x{n-1}.
inline std::string format_samples_csv(const std::vector<Vector>& samples) {
  std::string out = "id";
  const auto n = samples.empty() ? 0 : samples.front().size();
  for (Eigen::Index k = 0; k < n; ++k) out += ",x" + std::to_string(k);
  out += "\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out += "sample" + std::to_string(i);
    for (Eigen::Index k = 0; k < samples[i].size(); ++k) out += "," + format_number(samples[i][k]);
    out += "\n";
  }
  return out;
}

}  // namespace gass::io
