// Command-line front end. Talks to the model library exclusively through the
// C API in qrng.h; file formats and sweep plumbing live here.
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qrng.h"

namespace {

using ordered_json = nlohmann::ordered_json;

// Exit codes: 0 success, 2 configuration/usage, 3 model/numeric, 4 data.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitModel = 3;
constexpr int kExitData = 4;
constexpr int kExitInternal = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(qrng_status status) {
  switch (status) {
    case QRNG_OK:
      return kExitOk;
    case QRNG_E_ARGUMENT:
    case QRNG_E_CONFIG:
      return kExitConfig;
    case QRNG_E_MODEL:
      return kExitModel;
    case QRNG_E_DATA:
      return kExitData;
    case QRNG_E_INTERNAL:
      break;
  }
  return kExitInternal;
}

// Throws out of command code when a library call fails; carries the code.
struct ApiError : std::runtime_error {
  int exit_code;
  explicit ApiError(qrng_status status)
      : std::runtime_error(qrng_error_message()),
        exit_code(exit_code_for(status)) {}
};

void check(qrng_status status) {
  if (status != QRNG_OK) throw ApiError(status);
}

// ---------------------------------------------------------------------------
// Run configuration: Appendix-table defaults, overridden by --config JSON,
// overridden by explicit flags.

struct RunConfig {
  std::string source_type = "sps";  // single-source commands (simulate, ...)
  double lambda = 5e7;
  double decay_rate = 1e8;
  std::optional<double> pump_rate;  // alternative to lambda for the sps

  qrng_chain chain{};  // filled from qrng_chain_defaults() in main

  std::string mode = "both";  // discard | keep | both

  double grid_dt = 0.05e-9;
  double grid_t_max = 2e-6;
  int grid_m_max = 12;

  std::optional<double> lambda_min, lambda_max;
  std::optional<int> points;

  double duration = 1.0;
  std::uint64_t sim_seed = 1;
  bool jitter = false;

  std::size_t block = 4096;
  std::optional<double> h_min;
  double eps_log2 = -64.0;
  std::uint64_t extract_seed = 1;

  std::string out_dir = ".";
};

void reject_unknown_keys(const nlohmann::json& obj,
                         std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw UsageError("unknown config key: " + where + item.key());
  }
}

template <typename T>
void load_field(const nlohmann::json& obj, const char* key, T& out,
                const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError("config key " + where + key + " has the wrong type");
  }
}

template <typename T>
void load_optional(const nlohmann::json& obj, const char* key,
                   std::optional<T>& out, const std::string& where) {
  if (!obj.contains(key)) return;
  T value{};
  load_field(obj, key, value, where);
  out = value;
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw UsageError("config root must be a JSON object");
  reject_unknown_keys(doc,
                      {"source", "chain", "mode", "grid", "sweep", "simulate",
                       "extract", "out_dir"},
                      "");

  if (doc.contains("source")) {
    const auto& src = doc.at("source");
    reject_unknown_keys(src, {"type", "lambda", "pump_rate", "decay_rate"},
                        "source.");
    load_field(src, "type", cfg.source_type, "source.");
    load_field(src, "lambda", cfg.lambda, "source.");
    load_field(src, "decay_rate", cfg.decay_rate, "source.");
    load_optional(src, "pump_rate", cfg.pump_rate, "source.");
    if (cfg.source_type != "laser" && cfg.source_type != "sps")
      throw UsageError("source.type must be \"laser\" or \"sps\"");
  }
  if (doc.contains("chain")) {
    const auto& chain = doc.at("chain");
    reject_unknown_keys(
        chain, {"eta_qe", "p_a", "tau_dead", "tau_cw", "sigma_jitt"}, "chain.");
    load_field(chain, "eta_qe", cfg.chain.eta_qe, "chain.");
    load_field(chain, "p_a", cfg.chain.p_a, "chain.");
    load_field(chain, "tau_dead", cfg.chain.tau_dead, "chain.");
    load_field(chain, "tau_cw", cfg.chain.tau_cw, "chain.");
    load_field(chain, "sigma_jitt", cfg.chain.sigma_jitt, "chain.");
  }
  if (doc.contains("mode")) {
    load_field(doc, "mode", cfg.mode, "");
    if (cfg.mode != "discard" && cfg.mode != "keep" && cfg.mode != "both")
      throw UsageError("mode must be \"discard\", \"keep\" or \"both\"");
  }
  if (doc.contains("grid")) {
    const auto& grid = doc.at("grid");
    reject_unknown_keys(grid, {"dt", "t_max", "m_max"}, "grid.");
    load_field(grid, "dt", cfg.grid_dt, "grid.");
    load_field(grid, "t_max", cfg.grid_t_max, "grid.");
    load_field(grid, "m_max", cfg.grid_m_max, "grid.");
  }
  if (doc.contains("sweep")) {
    const auto& sweep = doc.at("sweep");
    reject_unknown_keys(sweep, {"lambda_min", "lambda_max", "points"},
                        "sweep.");
    load_optional(sweep, "lambda_min", cfg.lambda_min, "sweep.");
    load_optional(sweep, "lambda_max", cfg.lambda_max, "sweep.");
    load_optional(sweep, "points", cfg.points, "sweep.");
  }
  if (doc.contains("simulate")) {
    const auto& sim = doc.at("simulate");
    reject_unknown_keys(sim, {"duration", "seed", "jitter"}, "simulate.");
    load_field(sim, "duration", cfg.duration, "simulate.");
    load_field(sim, "seed", cfg.sim_seed, "simulate.");
    load_field(sim, "jitter", cfg.jitter, "simulate.");
  }
  if (doc.contains("extract")) {
    const auto& ext = doc.at("extract");
    reject_unknown_keys(ext, {"block", "h_min", "eps_log2", "seed"},
                        "extract.");
    load_field(ext, "block", cfg.block, "extract.");
    load_optional(ext, "h_min", cfg.h_min, "extract.");
    load_field(ext, "eps_log2", cfg.eps_log2, "extract.");
    load_field(ext, "seed", cfg.extract_seed, "extract.");
  }
  load_field(doc, "out_dir", cfg.out_dir, "");
}

// ---------------------------------------------------------------------------
// Small shared helpers.

qrng_source make_source(const RunConfig& cfg, bool sps, double lambda) {
  qrng_source src{};
  src.kind = sps ? QRNG_SOURCE_TWO_LEVEL : QRNG_SOURCE_LASER;
  src.photon_rate = lambda;
  src.decay_rate = cfg.decay_rate;
  return src;
}

qrng_source configured_source(const RunConfig& cfg) {
  const bool sps = cfg.source_type == "sps";
  double lambda = cfg.lambda;
  if (sps && cfg.pump_rate) {
    check(qrng_emission_rate(*cfg.pump_rate, cfg.decay_rate, &lambda));
  }
  return make_source(cfg, sps, lambda);
}

std::vector<bool> selected_sources(const RunConfig& cfg, bool restricted,
                                   const std::string& which) {
  // Index 0: laser, 1: sps.
  if (!restricted) return {true, true};
  if (which == "laser") return {true, false};
  if (which == "sps") return {false, true};
  throw UsageError("--source must be laser or sps");
}

std::vector<qrng_mode> selected_modes(const RunConfig& cfg) {
  if (cfg.mode == "discard") return {QRNG_MODE_DISCARD};
  if (cfg.mode == "keep") return {QRNG_MODE_KEEP};
  return {QRNG_MODE_DISCARD, QRNG_MODE_KEEP};
}

const char* mode_name(qrng_mode mode) {
  return mode == QRNG_MODE_KEEP ? "keep" : "discard";
}

const char* source_name(bool sps) { return sps ? "sps" : "laser"; }

// Default scan bounds per source kind; the sps stays strictly below the decay
// rate.
void default_bounds(const RunConfig& cfg, bool sps, double& lo, double& hi) {
  if (sps) {
    lo = 1e-3 * cfg.decay_rate;
    hi = 0.9999 * cfg.decay_rate;
  } else {
    lo = 1e5;
    hi = 1e12;
  }
}

std::vector<double> lambda_sweep(const RunConfig& cfg, bool sps) {
  double lo, hi;
  default_bounds(cfg, sps, lo, hi);
  if (cfg.lambda_min) lo = *cfg.lambda_min;
  if (cfg.lambda_max) hi = *cfg.lambda_max;
  if (!(lo > 0.0) || !(hi > lo))
    throw UsageError("sweep range is empty: lambda_min must be positive and "
                     "below lambda_max");
  int n;
  if (cfg.points) {
    n = *cfg.points;
    if (n < 2) throw UsageError("sweep needs at least 2 points");
  } else {
    const double decades = std::log10(hi / lo);
    n = static_cast<int>(std::lround(200.0 * decades)) + 1;
    n = std::min(n, 3000);
    n = std::max(n, 2);
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        std::exp(llo + (lhi - llo) * i / (n - 1));
  return out;
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& header)
      : path_(path.string()) {
    file_ = std::fopen(path_.c_str(), "wb");
    if (!file_) throw UsageError("cannot open output file: " + path_);
    std::fputs(header.c_str(), file_);
    std::fputc('\n', file_);
  }
  ~CsvFile() {
    if (file_) std::fclose(file_);
  }
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;

  // Fixed 9-significant-digit scientific notation keeps reruns byte-exact.
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) std::fputc(',', file_);
      std::fprintf(file_, "%.8e", values[i]);
    }
    std::fputc('\n', file_);
  }
  void raw_row(const std::string& line) {
    std::fputs(line.c_str(), file_);
    std::fputc('\n', file_);
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::FILE* file_ = nullptr;
};

std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return buf;
}

std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory: " + cfg.out_dir);
  return dir;
}

void write_json(const std::filesystem::path& path, const ordered_json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open output file: " + path.string());
  out << doc.dump(2) << '\n';
}

int worker_count() {
  if (const char* env = std::getenv("QRNG_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 2;
}

// Runs fn(i) for i in [0, n) on a capped worker pool; results are indexed, so
// assembly order never depends on completion order.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const int workers =
      std::max(1, std::min<int>(worker_count(), static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_lock;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> hold(error_lock);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// curves

struct CurvesArgs {
  std::string which;
  std::string tau_cw_list;  // comma-separated overrides for rawbit
};

std::vector<double> parse_tau_cw_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("--tau-cw expects comma-separated numbers, got: " +
                       item);
    }
  }
  if (values.empty()) throw UsageError("--tau-cw list is empty");
  return values;
}

void curves_rawbit(const RunConfig& cfg, const std::vector<bool>& sources,
                   const std::vector<double>& tau_cws, bool tau_family,
                   const std::filesystem::path& dir) {
  for (int sps = 0; sps < 2; ++sps) {
    if (!sources[static_cast<std::size_t>(sps)]) continue;
    const auto lambdas = lambda_sweep(cfg, sps != 0);
    for (double tcw : tau_cws) {
      qrng_chain chain = cfg.chain;
      chain.tau_cw = tcw;
      std::string name = std::string("rawbit_") + source_name(sps != 0);
      if (tau_family) {
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, "_tcw%g", tcw);
        name += suffix;
      }
      CsvFile csv(dir / (name + ".csv"),
                  "lambda,click_a,click_b,bit_a,bit_b,coincidence,bit_total");
      for (double lambda : lambdas) {
        const qrng_source src = make_source(cfg, sps != 0, lambda);
        qrng_rates rates{};
        check(qrng_rate_bundle(&src, &chain, &rates));
        csv.row({lambda, rates.click_a, rates.click_b, rates.bit_a,
                 rates.bit_b, rates.coincidence, rates.bit_total});
      }
      std::printf("wrote %s (%zu points)\n", csv.path().c_str(),
                  lambdas.size());
    }
  }
}

void curves_transitions(const RunConfig& cfg, const std::vector<bool>& sources,
                        const std::filesystem::path& dir) {
  for (int sps = 0; sps < 2; ++sps) {
    if (!sources[static_cast<std::size_t>(sps)]) continue;
    const auto lambdas = lambda_sweep(cfg, sps != 0);
    for (qrng_mode mode : selected_modes(cfg)) {
      const bool keep = mode == QRNG_MODE_KEEP;
      const std::string name = std::string("transitions_") +
                               source_name(sps != 0) + "_" + mode_name(mode);
      CsvFile csv(dir / (name + ".csv"),
                  keep ? "lambda,p_a_given_a,p_b_given_a,p_ab_given_a,"
                         "p_a_given_ab,p_ab_given_ab"
                       : "lambda,p_a_given_a,p_b_given_a");
      for (double lambda : lambdas) {
        const qrng_source src = make_source(cfg, sps != 0, lambda);
        qrng_transition_model model{};
        check(qrng_transition_matrix(&src, &cfg.chain, mode, &model));
        if (keep)
          csv.row({lambda, model.row[0][0], model.row[0][1], model.row[0][2],
                   model.row[2][0], model.row[2][2]});
        else
          csv.row({lambda, model.row[0][0], model.row[0][1]});
      }
      std::printf("wrote %s (%zu points)\n", csv.path().c_str(),
                  lambdas.size());
    }
  }
}

void curves_entropy(const RunConfig& cfg, const std::vector<bool>& sources,
                    const std::string& prefix,
                    const std::filesystem::path& dir) {
  for (int sps = 0; sps < 2; ++sps) {
    if (!sources[static_cast<std::size_t>(sps)]) continue;
    const auto lambdas = lambda_sweep(cfg, sps != 0);
    for (qrng_mode mode : selected_modes(cfg)) {
      const std::string name =
          prefix + "_" + source_name(sps != 0) + "_" + mode_name(mode);
      CsvFile csv(
          dir / (name + ".csv"),
          "lambda,outcome_rate,h_sh_cond,h_min_cond,h_sh_rate,h_min_rate");
      for (double lambda : lambdas) {
        const qrng_source src = make_source(cfg, sps != 0, lambda);
        qrng_entropy_point point{};
        check(qrng_entropy_eval(&src, &cfg.chain, mode, &point));
        csv.row({point.lambda, point.outcome_rate, point.shannon_cond,
                 point.min_cond, point.shannon_rate, point.min_rate});
      }
      std::printf("wrote %s (%zu points)\n", csv.path().c_str(),
                  lambdas.size());
    }
  }
}

void curves_grid(const RunConfig& cfg, const std::vector<bool>& sources,
                 bool count_curves, const std::filesystem::path& dir) {
  for (int sps = 0; sps < 2; ++sps) {
    if (!sources[static_cast<std::size_t>(sps)]) continue;
    const qrng_source src = make_source(cfg, sps != 0, cfg.lambda);
    const double eta = cfg.chain.eta_qe * cfg.chain.p_a;  // detector a
    qrng_grid* grid = nullptr;
    check(qrng_grid_create(&src, eta, cfg.grid_dt, cfg.grid_t_max,
                           cfg.grid_m_max, &grid));
    struct Guard {
      qrng_grid* g;
      ~Guard() { qrng_grid_destroy(g); }
    } guard{grid};
    double dt = 0, t_max = 0;
    std::size_t points = 0;
    int m_max = 0;
    check(qrng_grid_info(grid, &dt, &t_max, &points, &m_max));
    const int m_lo = count_curves ? 0 : 1;
    for (int m = m_lo; m <= m_max; ++m) {
      const double* data = nullptr;
      std::size_t count = 0;
      check(count_curves ? qrng_grid_count_curve(grid, m, &data, &count)
                         : qrng_grid_density(grid, m, &data, &count));
      std::string name = std::string(count_curves ? "pm_" : "waiting_") +
                         source_name(sps != 0) + "_m" + std::to_string(m);
      CsvFile csv(dir / (name + ".csv"), "tau_s,value");
      for (std::size_t i = 0; i < count; ++i)
        csv.row({static_cast<double>(i) * dt, data[i]});
    }
    std::printf("wrote %s curves for %s (m %d..%d, %zu points each)\n",
                count_curves ? "pm" : "waiting", source_name(sps != 0), m_lo,
                m_max, points);
  }
}

int cmd_curves(const RunConfig& cfg, const CurvesArgs& args,
               const std::vector<bool>& sources) {
  const auto dir = prepare_out_dir(cfg);
  std::vector<double> tau_cws = {cfg.chain.tau_cw};
  bool tau_family = false;
  if (!args.tau_cw_list.empty()) {
    tau_cws = parse_tau_cw_list(args.tau_cw_list);
    tau_family = true;
  }

  ordered_json meta;
  meta["command"] = "curves";
  meta["which"] = args.which;
  if (args.which == "rawbit") {
    curves_rawbit(cfg, sources, tau_cws, tau_family, dir);
  } else if (args.which == "transitions") {
    curves_transitions(cfg, sources, dir);
    meta["approximations"] = {"coincidence-deadtime-aligned"};
  } else if (args.which == "entropy" || args.which == "entropy-rate") {
    curves_entropy(cfg, sources,
                   args.which == "entropy" ? "entropy" : "entropy_rate", dir);
    meta["approximations"] = {"coincidence-deadtime-aligned"};
  } else if (args.which == "waiting") {
    curves_grid(cfg, sources, false, dir);
  } else if (args.which == "pm") {
    curves_grid(cfg, sources, true, dir);
  } else {
    throw UsageError(
        "unknown curve family: " + args.which +
        " (expected rawbit|transitions|entropy|entropy-rate|waiting|pm)");
  }
  write_json(dir / "curves_meta.json", meta);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// optimum

ordered_json optimum_to_json(const qrng_optimum& opt, bool sps) {
  ordered_json j;
  j["lambda_star"] = opt.lambda_star;
  if (sps) j["pump_star"] = opt.pump_star;
  j["min_rate_star"] = opt.min_rate_star;
  j["unimodal"] = opt.unimodal != 0;
  return j;
}

int cmd_optimum(const RunConfig& cfg) {
  const auto dir = prepare_out_dir(cfg);
  qrng_optimum results[2][2];  // [sps][keep]
  for (int sps = 0; sps < 2; ++sps)
    for (int keep = 0; keep < 2; ++keep)
      check(qrng_find_optimum(
          sps ? QRNG_SOURCE_TWO_LEVEL : QRNG_SOURCE_LASER, cfg.decay_rate,
          &cfg.chain, keep ? QRNG_MODE_KEEP : QRNG_MODE_DISCARD,
          &results[sps][keep]));

  std::printf("%-16s %-9s %14s %14s %14s\n", "source", "mode", "lambda*",
              "pump*", "min_rate*");
  for (int sps = 0; sps < 2; ++sps)
    for (int keep = 0; keep < 2; ++keep) {
      const auto& r = results[sps][keep];
      char pump[24];
      if (sps)
        std::snprintf(pump, sizeof pump, "%14.6e", r.pump_star);
      else
        std::snprintf(pump, sizeof pump, "%14s", "-");
      std::printf("%-16s %-9s %14.6e %s %14.6e%s\n", source_name(sps != 0),
                  keep ? "keep" : "discard", r.lambda_star, pump,
                  r.min_rate_star, r.unimodal ? "" : "  [multi-modal]");
    }

  const double adv_discard =
      100.0 * (results[1][0].min_rate_star / results[0][0].min_rate_star - 1.0);
  const double adv_keep =
      100.0 * (results[1][1].min_rate_star / results[0][1].min_rate_star - 1.0);
  const double laser_keep_gain =
      100.0 * (results[0][1].min_rate_star / results[0][0].min_rate_star - 1.0);
  const double sps_keep_gain =
      100.0 * (results[1][1].min_rate_star / results[1][0].min_rate_star - 1.0);
  std::printf("sps advantage: %.2f%% (discard), %.2f%% (keep)\n", adv_discard,
              adv_keep);
  std::printf("keep-vs-discard gain: laser %.2f%%, sps %.2f%%\n",
              laser_keep_gain, sps_keep_gain);

  ordered_json doc;
  doc["laser"]["discard"] = optimum_to_json(results[0][0], false);
  doc["laser"]["keep"] = optimum_to_json(results[0][1], false);
  doc["sps"]["discard"] = optimum_to_json(results[1][0], true);
  doc["sps"]["keep"] = optimum_to_json(results[1][1], true);
  doc["advantage_discard_percent"] = adv_discard;
  doc["advantage_keep_percent"] = adv_keep;
  doc["laser_keep_gain_percent"] = laser_keep_gain;
  doc["sps_keep_gain_percent"] = sps_keep_gain;
  doc["approximations"] = {"coincidence-deadtime-aligned"};
  write_json(dir / "optimum.json", doc);
  std::printf("wrote %s\n", (dir / "optimum.json").string().c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct EventWriter {
  std::FILE* bin = nullptr;
  CsvFile* csv = nullptr;
  std::uint64_t written = 0;

  void write(const qrng_click& click) {
    unsigned char rec[10];
    const double scaled = click.time * 1e12;
    const std::int64_t ps = static_cast<std::int64_t>(std::llround(scaled));
    for (int i = 0; i < 8; ++i)
      rec[i] = static_cast<unsigned char>(
          (static_cast<std::uint64_t>(ps) >> (8 * i)) & 0xffu);
    rec[8] = click.detector;
    rec[9] = click.group;
    std::fwrite(rec, 1, sizeof rec, bin);
    if (csv)
      csv->raw_row(format_sci(click.time) + "," +
                   std::to_string(static_cast<int>(click.detector)) + "," +
                   std::to_string(static_cast<int>(click.group)));
    ++written;
  }
};

void event_sink(const qrng_click* click, void* user) {
  static_cast<EventWriter*>(user)->write(*click);
}

ordered_json tallies_to_json(const qrng_sim_tallies& t) {
  ordered_json j;
  j["emitted"] = t.emitted;
  j["transmitted"] = t.transmitted;
  j["incident_a"] = t.incident_a;
  j["incident_b"] = t.incident_b;
  j["clicks_a"] = t.clicks_a;
  j["clicks_b"] = t.clicks_b;
  j["dead_losses"] = t.dead_losses;
  j["outcomes_a"] = t.outcomes_a;
  j["outcomes_b"] = t.outcomes_b;
  j["outcomes_ab"] = t.outcomes_ab;
  j["order_swaps"] = t.order_swaps;
  j["window_escapes"] = t.window_escapes;
  j["window_entries"] = t.window_entries;
  j["duration"] = t.duration;
  return j;
}

int cmd_simulate(const RunConfig& cfg, bool with_csv) {
  if (!(cfg.duration > 0.0))
    throw UsageError("simulation duration must be positive");
  const auto dir = prepare_out_dir(cfg);

  qrng_sim_config sim{};
  sim.source = configured_source(cfg);
  sim.chain = cfg.chain;
  sim.duration = cfg.duration;
  sim.seed = cfg.sim_seed;
  sim.jitter = cfg.jitter ? 1 : 0;

  const auto bin_path = dir / "events.bin";
  std::FILE* bin = std::fopen(bin_path.string().c_str(), "wb");
  if (!bin)
    throw UsageError("cannot open output file: " + bin_path.string());
  std::optional<CsvFile> csv;
  if (with_csv) csv.emplace(dir / "events.csv", "time_s,detector,group");

  EventWriter writer{bin, csv ? &*csv : nullptr, 0};
  // One streamed pass; per-mode statistics afterwards would need a second
  // pass, so gather keep-mode stats here and discard-mode stats from a rerun
  // of the same seed (identical photon stream, cheap compared with I/O).
  qrng_sim_stats keep_stats{};
  const qrng_status run_status =
      qrng_sim_run_streamed(&sim, event_sink, &writer, QRNG_MODE_KEEP,
                            &keep_stats);
  std::fclose(bin);
  check(run_status);

  qrng_sim_stats discard_stats{};
  check(qrng_sim_run_streamed(&sim, nullptr, nullptr, QRNG_MODE_DISCARD,
                              &discard_stats));

  // Analytical reference at the simulated operating point.
  qrng_rates ana_rates{};
  check(qrng_rate_bundle(&sim.source, &sim.chain, &ana_rates));

  CsvFile cmp(dir / "comparison.csv",
              "quantity,mode,analytical,empirical,std_error,z");
  const auto add_rate = [&](const char* name, double ana, double emp,
                            double se) {
    const double z = se > 0.0 ? (emp - ana) / se : 0.0;
    cmp.raw_row(std::string(name) + ",-," + format_sci(ana) + "," +
                format_sci(emp) + "," + format_sci(se) + "," + format_sci(z));
  };
  add_rate("click_a", ana_rates.click_a, keep_stats.rates.click_a,
           keep_stats.rate_se.click_a);
  add_rate("click_b", ana_rates.click_b, keep_stats.rates.click_b,
           keep_stats.rate_se.click_b);
  add_rate("bit_a", ana_rates.bit_a, keep_stats.rates.bit_a,
           keep_stats.rate_se.bit_a);
  add_rate("bit_b", ana_rates.bit_b, keep_stats.rates.bit_b,
           keep_stats.rate_se.bit_b);
  add_rate("coincidence", ana_rates.coincidence, keep_stats.rates.coincidence,
           keep_stats.rate_se.coincidence);
  add_rate("bit_total", ana_rates.bit_total, keep_stats.rates.bit_total,
           keep_stats.rate_se.bit_total);

  const char* symbol[3] = {"a", "b", "ab"};
  for (qrng_mode mode : {QRNG_MODE_DISCARD, QRNG_MODE_KEEP}) {
    qrng_transition_model ana_model{};
    check(qrng_transition_matrix(&sim.source, &sim.chain, mode, &ana_model));
    const qrng_sim_stats& stats =
        mode == QRNG_MODE_KEEP ? keep_stats : discard_stats;
    for (int y = 0; y < ana_model.alphabet; ++y)
      for (int x = 0; x < ana_model.alphabet; ++x) {
        const double se = stats.row_se[y][x];
        const double emp = stats.matrix.row[y][x];
        const double ana = ana_model.row[y][x];
        const double z = se > 0.0 ? (emp - ana) / se : 0.0;
        cmp.raw_row(std::string("p(") + symbol[x] + "|" + symbol[y] + ")," +
                    mode_name(mode) + "," + format_sci(ana) + "," +
                    format_sci(emp) + "," + format_sci(se) + "," +
                    format_sci(z));
      }
  }

  ordered_json doc;
  doc["seed"] = cfg.sim_seed;
  doc["rng"] = qrng_rng_algorithm();
  doc["jitter"] = cfg.jitter;
  doc["source"] = cfg.source_type;
  doc["lambda"] = sim.source.photon_rate;
  doc["tallies"] = tallies_to_json(keep_stats.tallies);
  doc["total_outcomes_keep"] = keep_stats.total_outcomes;
  doc["total_outcomes_discard"] = discard_stats.total_outcomes;
  doc["events_written"] = writer.written;
  doc["approximations"] = {"coincidence-deadtime-aligned"};
  write_json(dir / "tallies.json", doc);

  std::printf("simulated %.3g s: %" PRIu64 " clicks, %" PRIu64
              " outcomes (keep alphabet)\n",
              cfg.duration,
              keep_stats.tallies.clicks_a + keep_stats.tallies.clicks_b,
              keep_stats.total_outcomes);
  std::printf("wrote %s, %s%s\n", bin_path.string().c_str(),
              (dir / "comparison.csv").string().c_str(),
              with_csv ? ", events.csv" : "");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// extract

std::vector<std::uint8_t> outcomes_from_events(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open event file: " + path);
  std::vector<std::uint8_t> outcomes;
  unsigned char rec[10];
  while (in.read(reinterpret_cast<char*>(rec), sizeof rec)) {
    const std::uint8_t detector = rec[8];
    const std::uint8_t group = rec[9];
    if (group == 2) continue;  // later member of an already-counted pair
    if (group == 1)
      outcomes.push_back(2);
    else
      outcomes.push_back(detector);
  }
  if (in.gcount() != 0)
    throw UsageError("event file is truncated: " + path);
  return outcomes;
}

int cmd_extract(const RunConfig& cfg, const std::string& input_path,
                bool from_sim, qrng_mode mode) {
  const auto dir = prepare_out_dir(cfg);
  if (!cfg.h_min)
    throw UsageError(
        "no h_min configured: pass --h-min (bits per outcome) or run the "
        "optimum command and use its conditional min-entropy");

  std::vector<std::uint8_t> outcomes;
  std::string source_desc;
  if (from_sim) {
    qrng_sim_config sim{};
    sim.source = configured_source(cfg);
    sim.chain = cfg.chain;
    sim.duration = cfg.duration;
    sim.seed = cfg.sim_seed;
    sim.jitter = cfg.jitter ? 1 : 0;
    qrng_sim* handle = nullptr;
    check(qrng_sim_run(&sim, &handle));
    struct Guard {
      qrng_sim* s;
      ~Guard() { qrng_sim_destroy(s); }
    } guard{handle};
    const std::uint8_t* data = nullptr;
    std::size_t count = 0;
    check(qrng_sim_outcomes(handle, &data, &count));
    outcomes.assign(data, data + count);
    source_desc = "simulation(seed=" + std::to_string(cfg.sim_seed) +
                  ", duration=" + std::to_string(cfg.duration) + ")";
  } else {
    std::string path = input_path;
    if (path.empty()) path = (dir / "events.bin").string();
    outcomes = outcomes_from_events(path);
    source_desc = path;
  }

  if (mode == QRNG_MODE_DISCARD) {
    std::erase(outcomes, std::uint8_t{2});
  }

  qrng_extractor* ext = nullptr;
  check(qrng_extractor_create(mode, cfg.block, *cfg.h_min, cfg.eps_log2,
                              cfg.extract_seed, &ext));
  struct Guard {
    qrng_extractor* e;
    ~Guard() { qrng_extractor_destroy(e); }
  } guard{ext};

  std::size_t n_bits = 0, m_bits = 0, seed_bits = 0;
  check(qrng_extractor_sizes(ext, &n_bits, &m_bits, &seed_bits));
  std::uint64_t fingerprint = 0;
  check(qrng_extractor_seed_fingerprint(ext, &fingerprint));

  const std::size_t blocks = outcomes.size() / cfg.block;
  if (blocks == 0)
    throw UsageError("input carries " + std::to_string(outcomes.size()) +
                     " usable outcomes; one block needs " +
                     std::to_string(cfg.block));

  std::vector<std::uint8_t> block_out((m_bits + 7) / 8);
  std::vector<std::uint8_t> bits;     // packed MSB-first across blocks
  std::uint64_t total_bits = 0;
  int carry_fill = 0;                 // bits already used in the last byte
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t got = 0;
    check(qrng_extractor_block(ext, outcomes.data() + b * cfg.block, cfg.block,
                               block_out.data(), block_out.size(), &got));
    for (std::size_t i = 0; i < got; ++i) {
      const int bit =
          (block_out[i >> 3] >> (7 - static_cast<int>(i & 7))) & 1;
      if (carry_fill == 0) bits.push_back(0);
      if (bit)
        bits.back() = static_cast<std::uint8_t>(
            bits.back() | (1u << (7 - carry_fill)));
      carry_fill = (carry_fill + 1) & 7;
      ++total_bits;
    }
  }

  const auto bits_path = dir / "bits.bin";
  {
    std::ofstream out(bits_path, std::ios::binary);
    if (!out)
      throw UsageError("cannot open output file: " + bits_path.string());
    out.write(reinterpret_cast<const char*>(bits.data()),
              static_cast<std::streamsize>(bits.size()));
  }

  char fp_hex[17];
  std::snprintf(fp_hex, sizeof fp_hex, "%016" PRIx64, fingerprint);
  ordered_json meta;
  meta["input"] = source_desc;
  meta["mode"] = mode_name(mode);
  meta["encoding"] = mode == QRNG_MODE_KEEP
                         ? "fixed 2-bit symbols a=00,b=01,ab=10"
                         : "fixed 1-bit symbols a=0,b=1";
  meta["block_outcomes"] = cfg.block;
  meta["h_min"] = *cfg.h_min;
  meta["eps_log2"] = cfg.eps_log2;
  meta["n_bits"] = n_bits;
  meta["m_bits"] = m_bits;
  meta["seed_bits"] = seed_bits;
  meta["seed_value"] = cfg.extract_seed;
  meta["seed_fingerprint"] = fp_hex;
  meta["seed_expansion"] = qrng_rng_algorithm();
  meta["input_outcomes"] = outcomes.size();
  meta["blocks"] = blocks;
  meta["outcomes_dropped"] = outcomes.size() - blocks * cfg.block;
  meta["output_bits"] = total_bits;
  write_json(dir / "extract_meta.json", meta);

  std::printf("extractor: n=%zu bits in, m=%zu bits out per block of %zu "
              "outcomes (h_min=%.6g)\n",
              n_bits, m_bits, cfg.block, *cfg.h_min);
  std::printf("hashed %zu blocks -> %" PRIu64 " bits; wrote %s\n", blocks,
              total_bits, bits_path.string().c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// robustness

int cmd_robustness(const RunConfig& cfg) {
  const auto dir = prepare_out_dir(cfg);
  const std::size_t count = qrng_robustness_count();
  const auto modes = selected_modes(cfg);

  struct Row {
    qrng_robustness_point point;
    qrng_mode mode;
    double sps_rate, laser_rate;
  };
  std::vector<Row> rows(count * modes.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    const std::size_t p = i / modes.size();
    const qrng_mode mode = modes[i % modes.size()];
    qrng_robustness_point point{};
    check(qrng_robustness_point_get(p, &point));
    qrng_optimum sps{}, laser{};
    check(qrng_find_optimum(QRNG_SOURCE_TWO_LEVEL, point.decay_rate,
                            &point.chain, mode, &sps));
    check(qrng_find_optimum(QRNG_SOURCE_LASER, point.decay_rate, &point.chain,
                            mode, &laser));
    rows[i] = Row{point, mode, sps.min_rate_star, laser.min_rate_star};
  });

  CsvFile csv(dir / "robustness.csv",
              "parameter,value,mode,sps_rate,laser_rate,advantage_percent");
  std::size_t positive = 0;
  for (const auto& row : rows) {
    const double advantage =
        100.0 * (row.sps_rate / row.laser_rate - 1.0);
    if (advantage > 0.0) ++positive;
    csv.raw_row(std::string(row.point.parameter) + "," +
                format_sci(row.point.value) + "," + mode_name(row.mode) + "," +
                format_sci(row.sps_rate) + "," + format_sci(row.laser_rate) +
                "," + format_sci(advantage));
  }
  std::printf("robustness sweep: %zu rows (%zu with positive advantage); "
              "wrote %s\n",
              rows.size(), positive, csv.path().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beam-splitter quantum random number generator: analytical "
               "model, event simulator and Toeplitz extractor"};
  app.require_subcommand(1);

  std::string config_path;
  std::string source_flag, mode_flag;
  double lambda_flag = 0, decay_flag = 0, lambda_min_flag = 0,
         lambda_max_flag = 0, duration_flag = 0, h_min_flag = 0,
         eps_flag = 0;
  int points_flag = 0;
  std::uint64_t seed_flag = 0, ext_seed_flag = 0;
  std::size_t block_flag = 0;
  std::string out_flag, input_flag, tau_cw_flag;
  bool jitter_flag = false, csv_flag = false, from_sim_flag = false;

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--source", source_flag, "restrict to one source: laser|sps");
  app.add_option("--mode", mode_flag, "outcome mode: discard|keep|both");
  app.add_option("--lambda", lambda_flag,
                 "photon rate for single-point commands (s^-1)");
  app.add_option("--decay-rate", decay_flag, "emitter decay rate (s^-1)");
  app.add_option("--lambda-min", lambda_min_flag, "sweep lower bound (s^-1)");
  app.add_option("--lambda-max", lambda_max_flag, "sweep upper bound (s^-1)");
  app.add_option("--points", points_flag, "sweep point count");
  app.add_option("--seed", seed_flag, "simulation seed");
  app.add_option("--out", out_flag, "output directory");

  auto* curves = app.add_subcommand("curves", "write model curves as CSV");
  CurvesArgs curves_args;
  curves->add_option("which", curves_args.which,
                     "rawbit|transitions|entropy|entropy-rate|waiting|pm")
      ->required();
  curves->add_option("--tau-cw", tau_cw_flag,
                     "comma-separated coincidence windows for rawbit (s)");

  auto* optimum = app.add_subcommand(
      "optimum", "locate the min-entropy-rate optimum for every source/mode");

  auto* simulate =
      app.add_subcommand("simulate", "run the event-level Monte Carlo");
  simulate->add_option("--duration", duration_flag, "simulated seconds");
  simulate->add_flag("--jitter", jitter_flag, "apply detector timing jitter");
  simulate->add_flag("--csv", csv_flag, "also write events.csv");

  auto* extract =
      app.add_subcommand("extract", "hash simulated outcomes into output bits");
  extract->add_option("--input", input_flag, "events.bin to read");
  extract->add_flag("--from-sim", from_sim_flag,
                    "simulate in memory instead of reading a file");
  extract->add_option("--h-min", h_min_flag, "min-entropy per outcome (bits)");
  extract->add_option("--block", block_flag, "outcomes per hashed block");
  extract->add_option("--eps-log2", eps_flag, "log2 security parameter");
  extract->add_option("--extract-seed", ext_seed_flag, "Toeplitz seed value");
  extract->add_option("--duration", duration_flag,
                      "simulated seconds for --from-sim");
  extract->add_flag("--jitter", jitter_flag,
                    "apply timing jitter in --from-sim");

  auto* robustness = app.add_subcommand(
      "robustness", "sps-vs-laser optimum rates over parameter sweeps");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg;
    qrng_chain_defaults(&cfg.chain);
    if (!config_path.empty()) apply_config_file(cfg, config_path);

    // Explicit flags win over the config file.
    if (app.count("--mode")) {
      if (mode_flag != "discard" && mode_flag != "keep" && mode_flag != "both")
        throw UsageError("--mode must be discard, keep or both");
      cfg.mode = mode_flag;
    }
    if (app.count("--lambda")) cfg.lambda = lambda_flag;
    if (app.count("--decay-rate")) cfg.decay_rate = decay_flag;
    if (app.count("--lambda-min")) cfg.lambda_min = lambda_min_flag;
    if (app.count("--lambda-max")) cfg.lambda_max = lambda_max_flag;
    if (app.count("--points")) cfg.points = points_flag;
    if (app.count("--seed")) cfg.sim_seed = seed_flag;
    if (app.count("--out")) cfg.out_dir = out_flag;
    if (app.count("--source")) {
      if (source_flag != "laser" && source_flag != "sps")
        throw UsageError("--source must be laser or sps");
      cfg.source_type = source_flag;
    }
    if (simulate->count("--duration") || extract->count("--duration"))
      cfg.duration = duration_flag;
    if (simulate->count("--jitter") || extract->count("--jitter"))
      cfg.jitter = jitter_flag;
    if (extract->count("--h-min")) cfg.h_min = h_min_flag;
    if (extract->count("--block")) cfg.block = block_flag;
    if (extract->count("--eps-log2")) cfg.eps_log2 = eps_flag;
    if (extract->count("--extract-seed")) cfg.extract_seed = ext_seed_flag;

    const bool restricted = app.count("--source") > 0;
    const auto sources = selected_sources(cfg, restricted, source_flag);

    if (curves->parsed()) {
      curves_args.tau_cw_list = tau_cw_flag;
      return cmd_curves(cfg, curves_args, sources);
    }
    if (optimum->parsed()) return cmd_optimum(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg, csv_flag);
    if (extract->parsed()) {
      qrng_mode mode = QRNG_MODE_DISCARD;
      if (cfg.mode == "keep") mode = QRNG_MODE_KEEP;
      else if (cfg.mode == "both")
        mode = QRNG_MODE_DISCARD;  // extraction runs one mode at a time
      return cmd_extract(cfg, input_flag, from_sim_flag, mode);
    }
    if (robustness->parsed()) return cmd_robustness(cfg);
    throw UsageError("no subcommand selected");
  } catch (const ApiError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
}
