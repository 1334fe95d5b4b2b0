// File formats: word files, JSON block distributions, process specs, reports,
// assignment problems and the decay-scan CSV.

#pragma once

#include <cstdio>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinsker/core.hpp"
#include "pinsker/entropy.hpp"
#include "pinsker/matching.hpp"
#include "pinsker/processes.hpp"
#include "pinsker/transport.hpp"
#include "pinsker/vwb.hpp"

namespace pinsker::io {

using Json = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kInvalidInput, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kInvalidInput, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorKind::kInvalidInput, "write failed for " + path);
}

inline Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidInput, what + ": " + e.what());
  }
}

// Runs `body`, turning nlohmann type errors into validation errors.
template <typename F>
auto with_json_errors(const std::string& what, F&& body) {
  try {
    return body();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidInput, what + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Words

/// Binary when every symbol is in "01", Ornstein when every symbol is in "0efs".
inline Alphabet infer_alphabet(std::string_view text) {
  const auto fits = [&](const Alphabet& a) {
    for (char c : text) {
      if (!a.index_of(c)) return false;
    }
    return true;
  };
  if (fits(Alphabet::binary())) return Alphabet::binary();
  if (fits(Alphabet::ornstein())) return Alphabet::ornstein();
  throw Error(ErrorKind::kUnknownSymbol, "word matches neither the binary nor the ornstein alphabet");
}

inline std::string strip_line(std::string text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

inline Word parse_word_text(const std::string& text, const std::optional<Alphabet>& alphabet) {
  const std::string line = strip_line(text);
  if (line.find('\n') != std::string::npos) {
    throw Error(ErrorKind::kInvalidInput, "word file must hold a single line");
  }
  if (line.empty()) throw Error(ErrorKind::kEmptyWord, "word file is empty");
  return parse_word(line, alphabet ? *alphabet : infer_alphabet(line));
}

inline Word read_word(const std::string& path, const std::optional<Alphabet>& alphabet = {}) {
  return parse_word_text(read_file(path), alphabet);
}

inline std::string format_word(const Word& w) { return w.str() + "\n"; }

// ---------------------------------------------------------------------------
// Block distributions

inline Json to_json(const BlockDist& d) {
  Json atoms = Json::object();
  for (std::size_t i = 0; i < d.support_size(); ++i) atoms[d.atom_string(i)] = d.atoms()[i].count;
  return Json{{"l", d.block_len()}, {"total", d.total()}, {"atoms", atoms}};
}

inline BlockDist block_dist_from_json(const Json& j, const std::optional<Alphabet>& alphabet = {}) {
  return with_json_errors("BlockDist", [&] {
    const std::size_t l = j.at("l").get<std::size_t>();
    std::vector<std::pair<std::string, std::uint64_t>> entries;
    std::string all_symbols;
    for (const auto& [word, count] : j.at("atoms").items()) {
      entries.emplace_back(word, count.get<std::uint64_t>());
      all_symbols += word;
    }
    if (entries.empty()) throw Error(ErrorKind::kInvalidInput, "BlockDist has no atoms");
    BlockDist d = BlockDist::from_words(alphabet ? *alphabet : infer_alphabet(all_symbols), l, entries);
    if (j.contains("total") && j.at("total").get<std::uint64_t>() != d.total()) {
      throw Error(ErrorKind::kInvalidInput, "BlockDist total does not equal the sum of counts");
    }
    return d;
  });
}

inline BlockDist read_block_dist(const std::string& path, const std::optional<Alphabet>& alphabet = {}) {
  return block_dist_from_json(parse_json(read_file(path), path), alphabet);
}

// ---------------------------------------------------------------------------
// Process specs

inline Json to_json(const OrnsteinSpec& s) {
  return Json{{"h0", s.h0}, {"f", s.f}, {"s", s.s}, {"r_max", s.r_max}};
}

inline OrnsteinSpec ornstein_spec_from_json(const Json& j) {
  return with_json_errors("OrnsteinSpec", [&] {
    OrnsteinSpec s;
    s.h0 = j.at("h0").get<std::uint64_t>();
    s.f = j.at("f").get<std::vector<std::uint64_t>>();
    s.s = j.at("s").get<std::vector<std::uint64_t>>();
    s.r_max = j.at("r_max").get<std::size_t>();
    s.validate();
    return s;
  });
}

inline Json to_json(const BernoulliSpec& s) {
  return Json{{"alphabet", s.alphabet.symbols()}, {"probs", s.probs}};
}

inline BernoulliSpec bernoulli_spec_from_json(const Json& j) {
  return with_json_errors("BernoulliSpec", [&] {
    BernoulliSpec s;
    s.alphabet = Alphabet::from_name(j.at("alphabet").get<std::string>());
    s.probs = j.at("probs").get<std::vector<double>>();
    s.validate();
    return s;
  });
}

// ---------------------------------------------------------------------------
// Reports

inline Json to_json(const VwbReport& r) {
  Json per = Json::array();
  for (const auto& p : r.per_past) per.push_back({{"past", p.past}, {"count", p.count}, {"dbar", p.dbar}});
  return Json{{"l", r.l},
              {"m", r.m},
              {"k", r.k},
              {"score", r.score},
              {"retained_mass", r.retained_mass},
              {"retained_pasts", r.retained_pasts},
              {"windows", r.windows},
              {"method", to_string(r.method)},
              {"per_past", per}};
}

inline Json to_json(const ExtremalityProfile& p, double eps) {
  Json cells = Json::array();
  for (const auto& c : p.per_cell) {
    cells.push_back({{"cell", c.cell}, {"mass", c.mass}, {"dbar", c.dbar}, {"method", to_string(c.method)}});
  }
  return Json{{"eps", eps}, {"fraction_good", p.fraction_good}, {"cell_count", p.cell_count}, {"per_cell", cells}};
}

inline Json to_json(const MarkerStats& s) {
  return Json{{"mi_nats", s.mi_nats}, {"chi2", s.chi2}, {"dof", s.dof}, {"samples", s.samples}};
}

inline Json dbar_json(const TransportResult& r, const BlockDist& a, const BlockDist& b) {
  return Json{{"value", r.value},
              {"method", to_string(r.method)},
              {"support_sizes", {a.support_size(), b.support_size()}}};
}

// ---------------------------------------------------------------------------
// Assignment problems

inline AssignmentProblem assignment_from_json(const Json& j) {
  return with_json_errors("assignment problem", [&] {
    return AssignmentProblem(j.at("right_size").get<std::size_t>(),
                             j.at("neighbors").get<std::vector<std::vector<std::size_t>>>());
  });
}

inline Json to_json(const HallOutcome& outcome) {
  if (const auto* psi = std::get_if<Assignment>(&outcome)) return Json{{"psi", *psi}};
  return Json{{"witness", std::get<HallWitness>(outcome).subset}};
}

// ---------------------------------------------------------------------------
// Decay-scan CSV

inline std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

/// `scale` converts nats to the reporting unit (1 for nats, 1/ln 2 for bits);
/// the header names the unit.
inline std::string decay_csv(const std::vector<DecayRow>& rows, bool bits = false) {
  const double scale = bits ? 1.0 / std::log(2.0) : 1.0;
  const char* unit = bits ? "bits" : "nats";
  std::ostringstream out;
  out << "n,h_hat_" << unit << ",bound_general_" << unit << ",bound_binary_" << unit
      << ",block_len,windows\n";
  for (const auto& r : rows) {
    out << r.n << ',' << fixed6(r.h_hat * scale) << ','
        << (r.bound_general ? fixed6(*r.bound_general * scale) : "") << ','
        << (r.bound_binary ? fixed6(*r.bound_binary * scale) : "") << ',' << r.block_len << ','
        << r.windows << '\n';
  }
  return out.str();
}

}  // namespace pinsker::io
