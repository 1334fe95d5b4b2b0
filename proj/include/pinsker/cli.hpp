// Command-line experiment runner. Every subcommand reads its inputs from
// files, writes one primary output (to --out or standard output) and, when
// --out or --manifest is given, a JSON run manifest.

#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pinsker/automaton.hpp"
#include "pinsker/core.hpp"
#include "pinsker/entropy.hpp"
#include "pinsker/io.hpp"
#include "pinsker/matching.hpp"
#include "pinsker/processes.hpp"
#include "pinsker/transport.hpp"
#include "pinsker/vwb.hpp"

namespace pinsker::cli {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInfeasible = 3;

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Infeasible outcomes map to exit code 3, other library errors to 2.
inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNoPastRetained:
    case ErrorKind::kNoMarkers:
      return kExitInfeasible;
    default:
      return kExitValidation;
  }
}

struct Outcome {
  std::string primary;
  int code = kExitOk;
};

namespace detail {

inline TransportMethod parse_method(const std::string& name) {
  if (name == "exact") return TransportMethod::kExact;
  if (name == "greedy") return TransportMethod::kGreedy;
  if (name == "product") return TransportMethod::kProduct;
  throw Error(ErrorKind::kInvalidInput, "unknown method " + name);
}

inline std::string dump(const io::Json& j) { return j.dump(2) + "\n"; }

inline io::Json option_value(const CLI::Option* opt) {
  if (opt->get_expected_max() == 0) return opt->count() > 0;
  if (opt->count() > 0) {
    const auto& results = opt->results();
    if (results.size() == 1) return results.front();
    return results;
  }
  const std::string def = opt->get_default_str();
  return def.empty() ? io::Json(nullptr) : io::Json(def);
}

inline io::Json collect_params(const CLI::App* app) {
  io::Json params = io::Json::object();
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    params[name] = option_value(opt);
  }
  return params;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Erosion automata, Ornstein blocks and d-bar diagnostics", "pinsker"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  std::uint64_t seed = 42;
  std::size_t workers = 1;
  bool bits = false;
  std::string out_path, manifest_path, alphabet_name;
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  app.add_option("--workers", workers, "Worker threads")->capture_default_str()->check(CLI::Range(1, 1024));
  app.add_flag("--bits", bits, "Report entropies in bits");
  app.add_option("--out", out_path, "Primary output file (default: standard output)");
  app.add_option("--manifest", manifest_path, "Run manifest path (default: <out>.manifest.json)");
  app.add_option("--alphabet", alphabet_name, "Alphabet of input files: binary, ornstein or literal symbols");

  auto input_alphabet = [&]() -> std::optional<Alphabet> {
    if (alphabet_name.empty()) return std::nullopt;
    return Alphabet::from_name(alphabet_name);
  };
  std::map<CLI::App*, std::function<Outcome()>> handlers;

  // gen
  {
    auto* sub = app.add_subcommand("gen", "Sample a Bernoulli or Ornstein word");
    auto process = std::make_shared<std::string>();
    auto spec_path = std::make_shared<std::string>();
    auto len = std::make_shared<std::size_t>(0);
    auto whole_block = std::make_shared<bool>(false);
    sub->add_option("--process", *process, "bernoulli or ornstein")
        ->required()
        ->check(CLI::IsMember({"bernoulli", "ornstein"}));
    sub->add_option("--spec", *spec_path, "Process spec JSON (default spec when omitted)");
    sub->add_option("--len", *len, "Word length");
    sub->add_flag("--block", *whole_block, "Emit one full r_max Ornstein block");
    handlers[sub] = [=, &seed]() -> Outcome {
      const RngSeed rs{seed};
      if (*process == "bernoulli") {
        if (*len == 0) throw Error(ErrorKind::kInvalidInput, "--len is required");
        BernoulliSpec spec;
        if (!spec_path->empty()) {
          spec = io::bernoulli_spec_from_json(io::parse_json(io::read_file(*spec_path), *spec_path));
        }
        return {io::format_word(bernoulli_sample(spec, *len, rs))};
      }
      OrnsteinSpec spec = OrnsteinSpec::defaults();
      if (!spec_path->empty()) {
        spec = io::ornstein_spec_from_json(io::parse_json(io::read_file(*spec_path), *spec_path));
      }
      if (*whole_block) return {io::format_word(ornstein_block(spec, spec.r_max, rs))};
      if (*len == 0) throw Error(ErrorKind::kInvalidInput, "--len or --block is required");
      return {io::format_word(ornstein_sample(spec, *len, rs))};
    };
  }

  // automaton
  {
    auto* sub = app.add_subcommand("automaton", "Apply the erosion automaton n times");
    auto in = std::make_shared<std::string>();
    auto iters = std::make_shared<std::size_t>(1);
    auto naive = std::make_shared<bool>(false);
    sub->add_option("--in", *in, "Input word file")->required();
    sub->add_option("--iters", *iters, "Number of iterations")->capture_default_str();
    sub->add_flag("--naive", *naive, "Iterate the local rule instead of the run-length pass");
    handlers[sub] = [=, &input_alphabet]() -> Outcome {
      const Word w = io::read_word(*in, input_alphabet());
      return {io::format_word(*naive ? apply_iter(w, *iters) : apply_iter_fast(w, *iters))};
    };
  }

  // scan
  {
    auto* sub = app.add_subcommand("scan", "Entropy decay scan along the erosion filtration");
    auto in = std::make_shared<std::string>();
    auto n_max = std::make_shared<std::size_t>(10);
    auto offset = std::make_shared<std::size_t>(6);
    auto min_windows = std::make_shared<double>(20.0);
    sub->add_option("--in", *in, "Input word file")->required();
    sub->add_option("--n-max", *n_max, "Largest iteration count")->capture_default_str();
    sub->add_option("--block-offset", *offset, "Block length is n + offset")->capture_default_str();
    sub->add_option("--min-windows", *min_windows, "Shrink l while windows per distinct block is below this")
        ->capture_default_str();
    handlers[sub] = [=, &input_alphabet, &workers, &bits]() -> Outcome {
      const Word w = io::read_word(*in, input_alphabet());
      BlockSchedule schedule;
      const std::size_t off = *offset;
      schedule.block_len_of_n = [off](std::size_t n) { return n + off; };
      schedule.min_windows_per_block = *min_windows;
      return {io::decay_csv(decay_scan(w, *n_max, schedule, workers), bits)};
    };
  }

  // dist
  {
    auto* sub = app.add_subcommand("dist", "Empirical l-block distribution of a word");
    auto in = std::make_shared<std::string>();
    auto l = std::make_shared<std::size_t>(0);
    sub->add_option("--in", *in, "Input word file")->required();
    sub->add_option("--l", *l, "Block length")->required();
    handlers[sub] = [=, &input_alphabet, &workers]() -> Outcome {
      const Word w = io::read_word(*in, input_alphabet());
      return {detail::dump(io::to_json(empirical_block_dist(w, *l, workers)))};
    };
  }

  // dbar
  {
    auto* sub = app.add_subcommand("dbar", "d-bar distance between two block distributions");
    auto a = std::make_shared<std::string>();
    auto b = std::make_shared<std::string>();
    auto method = std::make_shared<std::string>("exact");
    sub->add_option("--a", *a, "First BlockDist JSON")->required();
    sub->add_option("--b", *b, "Second BlockDist JSON")->required();
    sub->add_option("--method", *method, "exact, greedy or product")
        ->capture_default_str()
        ->check(CLI::IsMember({"exact", "greedy", "product"}));
    handlers[sub] = [=, &input_alphabet]() -> Outcome {
      const BlockDist da = io::read_block_dist(*a, input_alphabet());
      const BlockDist db = io::read_block_dist(*b, input_alphabet());
      return {detail::dump(io::dbar_json(dbar(da, db, detail::parse_method(*method)), da, db))};
    };
  }

  // vwb
  {
    auto* sub = app.add_subcommand("vwb", "Empirical very-weak-Bernoulli score");
    auto in = std::make_shared<std::string>();
    auto l = std::make_shared<std::size_t>(0);
    auto m = std::make_shared<std::size_t>(0);
    auto min_count = std::make_shared<std::uint64_t>(50);
    auto method = std::make_shared<std::string>("exact");
    sub->add_option("--in", *in, "Input word file")->required();
    sub->add_option("--l", *l, "Future block length")->required();
    sub->add_option("--m", *m, "Past length")->required();
    sub->add_option("--min-count", *min_count, "Minimum occurrences per past")->capture_default_str();
    sub->add_option("--method", *method, "exact, greedy or product")
        ->capture_default_str()
        ->check(CLI::IsMember({"exact", "greedy", "product"}));
    handlers[sub] = [=, &input_alphabet, &workers]() -> Outcome {
      const Word w = io::read_word(*in, input_alphabet());
      VwbOptions opt{*min_count, workers, detail::parse_method(*method)};
      return {detail::dump(io::to_json(vwb_score(w, *l, *m, opt)))};
    };
  }

  // rvwb
  {
    auto* sub = app.add_subcommand("rvwb", "Relative VWB score over a factor word");
    auto x = std::make_shared<std::string>();
    auto y = std::make_shared<std::string>();
    auto n = std::make_shared<std::size_t>(0);
    auto l = std::make_shared<std::size_t>(0);
    auto m = std::make_shared<std::size_t>(0);
    auto k = std::make_shared<std::size_t>(0);
    auto y_offset = std::make_shared<std::size_t>(0);
    auto min_count = std::make_shared<std::uint64_t>(50);
    sub->add_option("--x", *x, "Source word file")->required();
    auto* y_opt = sub->add_option("--y", *y, "Factor word file");
    auto* n_opt = sub->add_option("--n", *n, "Use the n-fold erosion of x as the factor");
    y_opt->excludes(n_opt);
    sub->add_option("--l", *l, "Future block length")->required();
    sub->add_option("--m", *m, "Past length")->required();
    sub->add_option("--k", *k, "Factor half-window")->required();
    sub->add_option("--y-offset", *y_offset, "y[j] is aligned with x[j + offset]")->capture_default_str();
    sub->add_option("--min-count", *min_count, "Minimum occurrences per cell")->capture_default_str();
    handlers[sub] = [=, &input_alphabet, &workers]() -> Outcome {
      const Word wx = io::read_word(*x, input_alphabet());
      if (y->empty() && *n == 0) throw Error(ErrorKind::kInvalidInput, "one of --y or --n is required");
      const Word wy = y->empty() ? apply_iter_fast(wx, *n) : io::read_word(*y, input_alphabet());
      VwbOptions opt{*min_count, workers, TransportMethod::kExact};
      return {detail::dump(io::to_json(relative_vwb_score(wx, wy, *l, *m, *k, opt, *y_offset)))};
    };
  }

  // extremality
  {
    auto* sub = app.add_subcommand("extremality", "d-bar profile of a partition of the l-windows");
    auto in = std::make_shared<std::string>();
    auto labels_path = std::make_shared<std::string>();
    auto l = std::make_shared<std::size_t>(0);
    auto eps = std::make_shared<double>(0.1);
    auto factor_n = std::make_shared<std::size_t>(0);
    sub->add_option("--in", *in, "Input word file")->required();
    sub->add_option("--l", *l, "Block length")->required();
    sub->add_option("--eps", *eps, "Threshold for good cells")->capture_default_str();
    auto* lab = sub->add_option("--labels", *labels_path, "JSON array of cell ids, one per window");
    auto* fac = sub->add_option("--factor-iters", *factor_n,
                                "Label window t by the n-fold erosion of w[t, t+l)");
    lab->excludes(fac);
    handlers[sub] = [=, &input_alphabet, &workers]() -> Outcome {
      const Word w = io::read_word(*in, input_alphabet());
      if (*l == 0 || *l > w.size()) throw Error(ErrorKind::kBlockTooLong, "invalid block length");
      const std::size_t windows = w.size() - *l + 1;
      std::vector<std::uint64_t> labels;
      if (!labels_path->empty()) {
        labels = io::with_json_errors("labels", [&] {
          return io::parse_json(io::read_file(*labels_path), *labels_path).get<std::vector<std::uint64_t>>();
        });
      } else if (*factor_n > 0) {
        if (*factor_n >= *l) throw Error(ErrorKind::kInvalidInput, "--factor-iters must be below l");
        labels = window_labels(apply_iter_fast(w, *factor_n), *l - *factor_n, windows);
      } else {
        labels.assign(windows, 0);
      }
      return {detail::dump(io::to_json(extremality_profile(w, labels, *l, *eps, workers), *eps))};
    };
  }

  // marker
  {
    auto* sub = app.add_subcommand("marker", "Past/future independence across erosion markers");
    auto in = std::make_shared<std::string>();
    auto n = std::make_shared<std::size_t>(0);
    auto p = std::make_shared<std::size_t>(3);
    auto f = std::make_shared<std::size_t>(3);
    auto min_count = std::make_shared<std::uint64_t>(1);
    auto mode = std::make_shared<std::string>("positions");
    auto symbol = std::make_shared<std::string>();
    auto min_run = std::make_shared<std::size_t>(1);
    sub->add_option("--in", *in, "Input word file")->required();
    sub->add_option("--n", *n, "Erosion iterations")->required();
    sub->add_option("--p", *p, "Past length")->capture_default_str();
    sub->add_option("--f", *f, "Future length")->capture_default_str();
    sub->add_option("--min-count", *min_count, "Minimum number of markers")->capture_default_str();
    sub->add_option("--mode", *mode, "positions or runs")
        ->capture_default_str()
        ->check(CLI::IsMember({"positions", "runs"}));
    sub->add_option("--symbol", *symbol, "Marker symbol (default: last alphabet symbol)");
    sub->add_option("--min-run", *min_run, "Minimum eroded run length in runs mode")->capture_default_str();
    handlers[sub] = [=, &input_alphabet, &bits]() -> Outcome {
      const Word w = io::read_word(*in, input_alphabet());
      MarkerOptions opt;
      opt.mode = *mode == "runs" ? MarkerMode::kMaximalRuns : MarkerMode::kPositions;
      opt.min_run = *min_run;
      opt.min_count = *min_count;
      opt.marker = static_cast<Symbol>(w.alphabet().size() - 1);
      if (!symbol->empty()) {
        const auto idx = symbol->size() == 1 ? w.alphabet().index_of((*symbol)[0]) : std::nullopt;
        if (!idx) throw Error(ErrorKind::kUnknownSymbol, "marker symbol '" + *symbol + "'");
        opt.marker = *idx;
      }
      const MarkerStats s = marker_independence(w, *n, *p, *f, opt);
      io::Json j = io::to_json(s);
      if (bits) j["mi_bits"] = s.mi_nats / std::log(2.0);
      return {detail::dump(j)};
    };
  }

  // blocks
  {
    auto* sub = app.add_subcommand("blocks", "Census of blocks reachable after n erosions");
    auto n = std::make_shared<std::size_t>(0);
    auto l = std::make_shared<std::size_t>(0);
    auto name = std::make_shared<std::string>("binary");
    sub->add_option("--n", *n, "Erosion iterations")->required();
    sub->add_option("--l", *l, "Block length (default n)");
    sub->add_option("--block-alphabet", *name, "Alphabet to enumerate")->capture_default_str();
    handlers[sub] = [=]() -> Outcome {
      const std::size_t len = *l == 0 ? *n : *l;
      const auto blocks = reachable_blocks(*n, len, Alphabet::from_name(*name));
      io::Json j{{"n", *n}, {"l", len}, {"count", blocks.size()}};
      j["blocks"] = std::vector<std::string>(blocks.begin(), blocks.end());
      return {detail::dump(j)};
    };
  }

  // kproc-info
  {
    auto* sub = app.add_subcommand("kproc-info", "Heights h(r) of the Ornstein construction");
    auto spec_path = std::make_shared<std::string>();
    sub->add_option("--spec", *spec_path, "OrnsteinSpec JSON (default spec when omitted)");
    handlers[sub] = [=]() -> Outcome {
      OrnsteinSpec spec = OrnsteinSpec::defaults();
      if (!spec_path->empty()) {
        spec = io::ornstein_spec_from_json(io::parse_json(io::read_file(*spec_path), *spec_path));
      }
      std::string csv = "r,f,s,h\n";
      csv += "0,,," + std::to_string(ornstein_height(spec, 0)) + "\n";
      for (std::size_t r = 1; r <= spec.r_max; ++r) {
        csv += std::to_string(r) + "," + std::to_string(spec.f_at(r)) + "," +
               (r >= 2 ? std::to_string(spec.s_at(r)) : "") + "," +
               std::to_string(ornstein_height(spec, r)) + "\n";
      }
      return {csv};
    };
  }

  // hall
  {
    auto* sub = app.add_subcommand("hall", "Injective assignment or Hall violation witness");
    auto in = std::make_shared<std::string>();
    auto require = std::make_shared<bool>(false);
    sub->add_option("--in", *in, "Problem JSON")->required();
    sub->add_flag("--require-injection", *require, "Exit 3 when no injection exists");
    handlers[sub] = [=]() -> Outcome {
      const AssignmentProblem problem =
          io::assignment_from_json(io::parse_json(io::read_file(*in), *in));
      const HallOutcome outcome = hall_matching(problem);
      const bool infeasible = std::holds_alternative<HallWitness>(outcome);
      return {detail::dump(io::to_json(outcome)), infeasible && *require ? kExitInfeasible : kExitOk};
    };
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const auto started = std::chrono::system_clock::now();
  Outcome outcome;
  try {
    outcome = handlers.at(chosen)();
    if (out_path.empty()) {
      out << outcome.primary;
    } else {
      io::write_file(out_path, outcome.primary);
    }
    if (!manifest_path.empty() || !out_path.empty()) {
      io::Json manifest{{"subcommand", chosen->get_name()},
                        {"params", detail::collect_params(chosen)},
                        {"seed", seed},
                        {"workers", workers},
                        {"bits", bits},
                        {"alphabet", alphabet_name.empty() ? io::Json(nullptr) : io::Json(alphabet_name)},
                        {"version", kVersion},
                        {"started_at", utc_timestamp(started)},
                        {"finished_at", utc_timestamp(std::chrono::system_clock::now())},
                        {"exit_code", outcome.code}};
      io::Json digest{{"path", out_path.empty() ? "-" : out_path},
                      {"bytes", outcome.primary.size()},
                      {"fnv1a64", hex64(fnv1a64(outcome.primary))}};
      manifest["outputs"] = io::Json::array({digest});
      io::write_file(manifest_path.empty() ? out_path + ".manifest.json" : manifest_path,
                     manifest.dump(2) + "\n");
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return outcome.code;
}

}  // namespace pinsker::cli
