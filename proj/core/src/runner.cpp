#include "cleanlabel/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include "cleanlabel/attackers.hpp"
#include "cleanlabel/classes.hpp"
#include "cleanlabel/geometry.hpp"
#include "cleanlabel/learners.hpp"

namespace cleanlabel {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-4), enough to fingerprint config files.

constexpr std::uint32_t kSha256K[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
    0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
    0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
    0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
    0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
    0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
    0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
    0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

std::uint32_t rotr32(std::uint32_t v, unsigned n) {
  return (v >> n) | (v << (32 - n));
}

class Sha256 {
 public:
  void update(const unsigned char* data, std::size_t len) {
    total_ += len;
    while (len > 0) {
      const std::size_t take = std::min(len, std::size_t{64} - buflen_);
      std::memcpy(buf_ + buflen_, data, take);
      buflen_ += take;
      data += take;
      len -= take;
      if (buflen_ == 64) {
        process(buf_);
        buflen_ = 0;
      }
    }
  }

  std::string hex_digest() {
    const std::uint64_t bits = total_ * 8;
    unsigned char pad = 0x80;
    update(&pad, 1);
    unsigned char zero = 0;
    while (buflen_ != 56) update(&zero, 1);
    unsigned char len_be[8];
    for (int i = 0; i < 8; ++i) {
      len_be[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
    }
    total_ -= 9;  // padding bytes are not message bytes; keep the math tidy
    update(len_be, 8);
    char out[65];
    for (int i = 0; i < 8; ++i) {
      std::snprintf(out + 8 * i, 9, "%08x", h_[i]);
    }
    return std::string(out, 64);
  }

 private:
  void process(const unsigned char block[64]) {
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i) {
      w[i] = (std::uint32_t{block[4 * i]} << 24) |
             (std::uint32_t{block[4 * i + 1]} << 16) |
             (std::uint32_t{block[4 * i + 2]} << 8) |
             std::uint32_t{block[4 * i + 3]};
    }
    for (int i = 16; i < 64; ++i) {
      const std::uint32_t s0 =
          rotr32(w[i - 15], 7) ^ rotr32(w[i - 15], 18) ^ (w[i - 15] >> 3);
      const std::uint32_t s1 =
          rotr32(w[i - 2], 17) ^ rotr32(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3];
    std::uint32_t e = h_[4], f = h_[5], g = h_[6], h = h_[7];
    for (int i = 0; i < 64; ++i) {
      const std::uint32_t s1 = rotr32(e, 6) ^ rotr32(e, 11) ^ rotr32(e, 25);
      const std::uint32_t ch = (e & f) ^ (~e & g);
      const std::uint32_t t1 = h + s1 + ch + kSha256K[i] + w[i];
      const std::uint32_t s0 = rotr32(a, 2) ^ rotr32(a, 13) ^ rotr32(a, 22);
      const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const std::uint32_t t2 = s0 + maj;
      h = g;
      g = f;
      f = e;
      e = d + t1;
      d = c;
      c = b;
      b = a;
      a = t1 + t2;
    }
    h_[0] += a;
    h_[1] += b;
    h_[2] += c;
    h_[3] += d;
    h_[4] += e;
    h_[5] += f;
    h_[6] += g;
    h_[7] += h;
  }

  std::uint32_t h_[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                         0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  unsigned char buf_[64];
  std::size_t buflen_ = 0;
  std::uint64_t total_ = 0;
};

// ---------------------------------------------------------------------------
// CSV formatting

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out;
  out.reserve(s.size() + 2);
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

std::string fmt_opt_size(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

std::string fmt_opt_double(const std::optional<double>& v) {
  return v ? fmt_double(*v) : std::string();
}

// ---------------------------------------------------------------------------
// Config parsing

[[noreturn]] void config_fail(const std::string& msg) {
  fail(ErrorKind::config, msg);
}

double jnum(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    config_fail(std::string("field '") + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

std::size_t jsize(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    config_fail(std::string("field '") + key + "' must be an integer");
  }
  const auto v = j.at(key).get<long long>();
  if (v < 0) config_fail(std::string("field '") + key + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

std::string jstring(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    config_fail(std::string("field '") + key + "' must be a string");
  }
  return j.at(key).get<std::string>();
}

// A built experiment: either a fixed distribution evaluated by
// attackable_rate, or a factory redrawn per training draw and evaluated by
// expected_attackable_rate. `fixed` carries the (empty) context so attacker
// builders have a uniform interface in both modes.
struct ExperimentBuild {
  bool redraw = false;
  TargetedDistribution dist;
  ExperimentFactory factory;
  Experiment fixed;
  std::string class_name;
  std::optional<std::size_t> n;
  std::optional<std::size_t> d;
  std::optional<double> gamma;
  std::optional<double> epsilon;
  FiniteClassPtr finite_class;
};

IntervalHypothesis parse_interval_target(const json& e) {
  if (!e.contains("target")) config_fail("interval experiment needs 'target'");
  const json& t = e.at("target");
  if (t.is_string() && t.get<std::string>() == "empty") {
    return IntervalHypothesis::empty();
  }
  if (!t.is_object()) config_fail("interval target must be 'empty' or {lo,hi}");
  const double lo = jnum(t, "lo");
  const double hi = jnum(t, "hi");
  const bool open = t.value("open", true);
  return open ? IntervalHypothesis::open(lo, hi)
              : IntervalHypothesis::closed(lo, hi);
}

PiecewiseDensity parse_density(const json& e) {
  if (!e.contains("density")) return PiecewiseDensity::uniform();
  const json& d = e.at("density");
  if (d.is_string() && d.get<std::string>() == "uniform") {
    return PiecewiseDensity::uniform();
  }
  if (!d.is_array()) config_fail("density must be 'uniform' or a piece array");
  std::vector<PiecewiseDensity::Piece> pieces;
  for (const json& p : d) {
    pieces.push_back({jnum(p, "lo"), jnum(p, "hi"), jnum(p, "weight")});
  }
  return PiecewiseDensity(std::move(pieces));
}

ExperimentBuild build_experiment(const json& cfg, std::size_t m) {
  if (!cfg.contains("experiment") || !cfg.at("experiment").is_object()) {
    config_fail("config needs an 'experiment' object");
  }
  const json& e = cfg.at("experiment");
  const std::string kind = e.value("kind", std::string());
  ExperimentBuild eb;
  if (kind == "interval") {
    eb.dist = make_interval_experiment(parse_interval_target(e),
                                       parse_density(e));
    eb.fixed.dist = eb.dist;
    eb.class_name = "intervals";
    eb.n = 1;
  } else if (kind == "halfsphere") {
    const std::size_t n = jsize(e, "n");
    const double eps = jnum(e, "epsilon");
    eb.dist = make_halfsphere_experiment(n, eps);
    eb.fixed.dist = eb.dist;
    eb.class_name = "linear";
    eb.n = n;
    eb.gamma = eb.dist.descriptor.gamma;
    eb.epsilon = eps;
  } else if (kind == "margin_lb") {
    const std::size_t n = jsize(e, "n");
    const double eps = jnum(e, "epsilon");
    eb.redraw = true;
    eb.factory = [n, eps](RngStream& r) {
      return make_margin_lb_experiment(n, eps, r);
    };
    eb.class_name = "linear";
    eb.n = n;
    eb.gamma = 0.125;
    eb.epsilon = eps;
  } else if (kind == "circles") {
    const std::size_t d = jsize(e, "d");
    const std::size_t t = jsize(e, "t");
    eb.redraw = true;
    eb.factory = [d, t, m](RngStream& r) {
      return make_circles_experiment(d, t, m, r);
    };
    eb.class_name = "sphere_circles";
    eb.n = 3;
    eb.d = d;
  } else if (kind == "circle_band") {
    const double eta = jnum(e, "eta");
    eb.redraw = true;
    eb.factory = [eta](RngStream& r) {
      return make_circle_band_experiment(eta, r);
    };
    eb.class_name = "circle_band";
    eb.n = 3;
  } else if (kind == "hollow_star") {
    const std::size_t k = jsize(e, "k");
    const HollowStarConstruction hc = make_hollow_star_class(k);
    eb.finite_class = hc.cls;
    eb.redraw = true;
    if (e.contains("i_star") && e.at("i_star").is_string()) {
      if (e.at("i_star").get<std::string>() != "uniform") {
        config_fail("i_star must be an index or \"uniform\"");
      }
      eb.factory = [cls = hc.cls, k](RngStream& r) {
        return make_hollow_star_experiment(
            cls, static_cast<std::size_t>(r.next_below(k)));
      };
    } else {
      const std::size_t i_star =
          e.contains("i_star") ? jsize(e, "i_star") : std::size_t{0};
      eb.factory = [cls = hc.cls, i_star](RngStream&) {
        return make_hollow_star_experiment(cls, i_star);
      };
    }
    eb.class_name = "finite_flip";
    eb.n = k;
  } else if (kind == "margin_disk") {
    const std::size_t n = jsize(e, "n");
    const double gamma = jnum(e, "gamma");
    eb.redraw = true;
    eb.factory = [n, gamma](RngStream& r) {
      return make_margin_disk_experiment(n, gamma, r);
    };
    eb.class_name = "linear";
    eb.n = n;
    eb.gamma = gamma;
  } else {
    config_fail("unknown experiment kind '" + kind + "'");
  }
  return eb;
}

json normalize_spec(const json& spec) {
  if (spec.is_string()) return json{{"kind", spec.get<std::string>()}};
  if (spec.is_object()) return spec;
  config_fail("learner/attacker specs must be strings or objects");
}

Learner build_learner(const json& spec_in, const ExperimentBuild& eb) {
  const json spec = normalize_spec(spec_in);
  const std::string kind = spec.value("kind", std::string());
  if (kind == "min_interval") return make_min_interval_learner();
  if (kind == "max_interval") return make_max_interval_learner();
  if (kind == "union_intervals") return make_union_intervals_learner();
  if (kind == "linear2d") return make_linear2d_learner();
  if (kind == "svm") return make_svm_learner();
  if (kind == "covering") {
    const std::size_t n =
        spec.contains("n") ? jsize(spec, "n") : eb.n.value_or(0);
    const double gamma =
        spec.contains("gamma") ? jnum(spec, "gamma") : eb.gamma.value_or(0.0);
    if (n == 0 || gamma <= 0.0) {
      config_fail("covering learner needs n and gamma");
    }
    return make_covering_learner(n, gamma);
  }
  if (kind == "circle_erm") {
    const std::size_t d =
        spec.contains("d") ? jsize(spec, "d") : eb.d.value_or(0);
    if (d == 0) config_fail("circle_erm learner needs d");
    return make_circle_erm_learner(d);
  }
  if (kind == "partition_majority") {
    if (!spec.contains("base")) config_fail("partition_majority needs 'base'");
    return make_partition_majority_learner(build_learner(spec.at("base"), eb),
                                           jsize(spec, "t"));
  }
  if (kind == "subsample") {
    if (!spec.contains("base")) config_fail("subsample needs 'base'");
    return make_subsample_learner(build_learner(spec.at("base"), eb),
                                  jnum(spec, "epsilon"), jsize(spec, "t"));
  }
  if (kind == "finite_erm") {
    if (!eb.finite_class) config_fail("finite_erm needs a finite experiment");
    return make_finite_erm_learner(eb.finite_class);
  }
  if (kind == "closure") {
    if (!eb.finite_class) config_fail("closure needs a finite experiment");
    return make_closure_learner(eb.finite_class);
  }
  if (kind == "vc1") {
    if (!eb.finite_class) config_fail("vc1 needs a finite experiment");
    return make_vc1_learner(eb.finite_class, jsize(spec, "f_row"));
  }
  if (kind == "projection") {
    if (!eb.finite_class) config_fail("projection needs a finite experiment");
    return make_projection_learner(eb.finite_class, jsize(spec, "t"));
  }
  config_fail("unknown learner kind '" + kind + "'");
}

struct AttackerPlan {
  std::function<Attacker(const Experiment&)> build;
  std::optional<std::size_t> t;
};

AttackerPlan build_attacker_plan(const json& spec_in,
                                 const ExperimentBuild& eb) {
  const json spec = normalize_spec(spec_in);
  const std::string kind = spec.value("kind", std::string());
  AttackerPlan plan;
  if (kind == "null") {
    plan.build = [](const Experiment&) { return make_null_attacker(); };
  } else if (kind == "interval_flood") {
    plan.build = [](const Experiment&) {
      return make_interval_flood_attacker();
    };
  } else if (kind == "svm_one_point") {
    if (!eb.n || !eb.gamma) {
      config_fail("svm_one_point needs an experiment with n and gamma");
    }
    const std::size_t n = *eb.n;
    const double gamma = *eb.gamma;
    plan.build = [n, gamma](const Experiment&) {
      Point v1(n, 0.0);
      v1[0] = 1.0;
      return make_svm_one_point_attacker(UnitVector(std::move(v1)), gamma);
    };
  } else if (kind == "sphere_reflection") {
    std::optional<double> eta;
    if (spec.contains("eta")) eta = jnum(spec, "eta");
    plan.build = [eta](const Experiment& ex) {
      if (eta) return make_sphere_reflection_attacker(*eta);
      if (!ex.ctx.eta) {
        config_fail("sphere_reflection needs eta from spec or experiment");
      }
      return make_sphere_reflection_attacker(*ex.ctx.eta);
    };
  } else if (kind == "margin_reflection") {
    plan.build = [](const Experiment& ex) {
      return make_margin_reflection_attacker(ex.ctx);
    };
  } else if (kind == "circle_tpoint") {
    const std::size_t t = jsize(spec, "t");
    plan.t = t;
    plan.build = [t](const Experiment& ex) {
      return make_circle_tpoint_attacker(t, ex.ctx);
    };
  } else if (kind == "hollow_star") {
    plan.build = [](const Experiment& ex) {
      if (!ex.ctx.finite_class || !ex.ctx.i_star) {
        config_fail("hollow_star attacker needs a finite experiment");
      }
      return make_hollow_star_attacker(ex.ctx.finite_class, *ex.ctx.i_star);
    };
  } else if (kind == "boundary_reflection") {
    plan.build = [](const Experiment& ex) {
      if (!ex.ctx.w_star) {
        config_fail("boundary_reflection needs the hidden direction");
      }
      return make_boundary_reflection_attacker(*ex.ctx.w_star,
                                               ex.ctx.b_star.value_or(0.0));
    };
  } else if (kind == "budget") {
    if (!spec.contains("inner")) config_fail("budget wrapper needs 'inner'");
    const std::size_t t = jsize(spec, "t");
    plan.t = t;
    const AttackerPlan inner = build_attacker_plan(spec.at("inner"), eb);
    plan.build = [inner_build = inner.build, t](const Experiment& ex) {
      return make_budget_wrapper(inner_build(ex), t);
    };
  } else {
    config_fail("unknown attacker kind '" + kind + "'");
  }
  return plan;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(reinterpret_cast<const unsigned char*>(data.data()), data.size());
  return h.hex_digest();
}

std::string results_csv_header() {
  return "experiment_id,class,learner,attacker,n,d,t,gamma,epsilon,m,trials,"
         "test_points,atk_mean,atk_ci95,err_mean,audit_violations,seed";
}

std::string results_csv_line(const ResultRow& row) {
  std::string out;
  out += csv_escape(row.experiment_id);
  out += ',';
  out += csv_escape(row.class_name);
  out += ',';
  out += csv_escape(row.learner);
  out += ',';
  out += csv_escape(row.attacker);
  out += ',';
  out += fmt_opt_size(row.n);
  out += ',';
  out += fmt_opt_size(row.d);
  out += ',';
  out += fmt_opt_size(row.t);
  out += ',';
  out += fmt_opt_double(row.gamma);
  out += ',';
  out += fmt_opt_double(row.epsilon);
  out += ',';
  out += std::to_string(row.m);
  out += ',';
  out += std::to_string(row.trials);
  out += ',';
  out += std::to_string(row.test_points);
  out += ',';
  out += fmt_double(row.atk_mean);
  out += ',';
  out += fmt_double(row.atk_ci95);
  out += ',';
  out += fmt_double(row.err_mean);
  out += ',';
  out += std::to_string(row.audit_violations);
  out += ',';
  out += std::to_string(row.seed);
  return out;
}

int run_config(const RunOptions& options, std::ostream& log) {
  std::string text;
  {
    std::ifstream in(options.config_path, std::ios::binary);
    if (!in) {
      log << "cannot read config: " << options.config_path << "\n";
      return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }

  json cfg;
  try {
    cfg = json::parse(text);
  } catch (const std::exception& e) {
    log << "config parse error: " << e.what() << "\n";
    return 2;
  }

  std::vector<ResultRow> rows;
  std::size_t total_failed = 0;
  std::size_t total_violations = 0;

  try {
    if (!cfg.is_object()) config_fail("config root must be an object");
    const std::string experiment_id = jstring(cfg, "experiment_id");
    const std::size_t m = jsize(cfg, "m");
    const std::size_t trials = jsize(cfg, "trials");
    const std::size_t test_points = jsize(cfg, "test_points");
    const bool include_pool = cfg.value("include_pool", false);
    std::uint64_t seed = 1;
    if (options.seed) {
      seed = *options.seed;
    } else if (cfg.contains("seed")) {
      seed = cfg.at("seed").get<std::uint64_t>();
    }

    const ExperimentBuild eb = build_experiment(cfg, m);

    if (!cfg.contains("learners") || !cfg.at("learners").is_array() ||
        cfg.at("learners").empty()) {
      config_fail("config needs a non-empty 'learners' array");
    }
    if (!cfg.contains("attackers") || !cfg.at("attackers").is_array() ||
        cfg.at("attackers").empty()) {
      config_fail("config needs a non-empty 'attackers' array");
    }

    std::vector<Learner> learners;
    for (const json& spec : cfg.at("learners")) {
      learners.push_back(build_learner(spec, eb));
    }
    std::vector<AttackerPlan> plans;
    for (const json& spec : cfg.at("attackers")) {
      plans.push_back(build_attacker_plan(spec, eb));
    }

    // Probe the attacker builders once so a bad pairing is a config error
    // rather than a pile of per-trial failures.
    std::vector<std::string> attacker_names;
    std::vector<Attacker> fixed_pool;
    if (eb.redraw) {
      RngStream probe_rng = RngStream::from_seed(seed).derive("probe");
      const Experiment probe = eb.factory(probe_rng);
      for (const auto& plan : plans) {
        attacker_names.push_back(plan.build(probe).name);
      }
    } else {
      for (const auto& plan : plans) {
        fixed_pool.push_back(plan.build(eb.fixed));
        attacker_names.push_back(fixed_pool.back().name);
      }
    }

    const RngStream base = RngStream::from_seed(seed).derive(experiment_id);
    for (const Learner& learner : learners) {
      ResultRow proto;
      proto.experiment_id = experiment_id;
      proto.class_name = eb.class_name;
      proto.learner = learner.name;
      proto.n = eb.n;
      proto.d = eb.d;
      proto.gamma = eb.gamma;
      proto.epsilon = eb.epsilon;
      proto.m = m;
      proto.trials = trials;
      proto.test_points = test_points;
      proto.seed = seed;

      const RngStream learner_rng = base.derive(learner.name);
      const std::size_t row_count = plans.size() + (include_pool ? 1 : 0);
      for (std::size_t k = 0; k < row_count; ++k) {
        const bool pooled = k == plans.size();
        ResultRow row = proto;
        row.attacker = pooled ? "pool" : attacker_names[k];
        row.t = pooled ? std::nullopt : plans[k].t;
        const RngStream row_rng = learner_rng.derive(row.attacker);

        if (!eb.redraw) {
          std::vector<Attacker> pool;
          if (pooled) {
            pool = fixed_pool;
          } else {
            pool.push_back(fixed_pool[k]);
          }
          const AttackReport report =
              attackable_rate(learner, pool, eb.dist, m, trials, test_points,
                              row_rng, options.workers);
          row.atk_mean = report.atk_mean;
          row.atk_ci95 = report.atk_ci.half_width();
          row.err_mean = report.err_mean;
          row.audit_violations =
              report.clean_label_violations + report.budget_violations;
          total_failed += report.failed_trials;
          for (const auto& err : report.errors) log << "error: " << err << "\n";
        } else {
          PoolFactory pool_factory;
          if (pooled) {
            pool_factory = [&plans](const Experiment& ex) {
              std::vector<Attacker> pool;
              pool.reserve(plans.size());
              for (const auto& plan : plans) pool.push_back(plan.build(ex));
              return pool;
            };
          } else {
            pool_factory = [&plan = plans[k]](const Experiment& ex) {
              return std::vector<Attacker>{plan.build(ex)};
            };
          }
          const ExpectedAttackReport report = expected_attackable_rate(
              learner, eb.factory, pool_factory, m, trials, test_points,
              row_rng, options.workers);
          row.atk_mean = report.atk_mean;
          row.atk_ci95 = 1.959963984540054 * report.atk_se;
          row.err_mean = report.err_mean;
          row.audit_violations =
              report.clean_label_violations + report.budget_violations;
          total_failed += report.failed_draws;
          for (const auto& err : report.errors) log << "error: " << err << "\n";
        }
        total_violations += row.audit_violations;
        log << experiment_id << " learner=" << row.learner
            << " attacker=" << row.attacker << " atk=" << row.atk_mean
            << " err=" << row.err_mean << "\n";
        rows.push_back(std::move(row));
      }
    }

    namespace fs = std::filesystem;
    fs::create_directories(options.out_dir);
    const fs::path csv_path = fs::path(options.out_dir) / "results.csv";
    {
      std::ofstream csv(csv_path, std::ios::binary);
      if (!csv) config_fail("cannot write " + csv_path.string());
      csv << results_csv_header() << "\n";
      for (const auto& row : rows) csv << results_csv_line(row) << "\n";
    }

    json manifest;
    manifest["schema"] = 1;
    manifest["experiment_id"] = experiment_id;
    manifest["config_sha256"] = sha256_hex(text);
    manifest["seed"] = seed;
    manifest["workers"] = options.workers;
    manifest["rows"] = rows.size();
    manifest["failed_trials"] = total_failed;
    manifest["audit_violations"] = total_violations;
    manifest["output"] = "results.csv";
    {
      std::ofstream mf(fs::path(options.out_dir) / "manifest.json",
                       std::ios::binary);
      mf << manifest.dump(2) << "\n";
    }
    log << "wrote " << csv_path.string() << " (" << rows.size() << " rows)\n";
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) {
      log << "config error: " << e.what() << "\n";
      return 2;
    }
    log << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  }

  if (total_failed > 0 || total_violations > 0) {
    log << "FAILURES: trial_errors=" << total_failed
        << " audit_violations=" << total_violations << "\n";
    return 3;
  }
  return 0;
}

namespace {

// ---------------------------------------------------------------------------
// Audit battery

std::size_t fuzz_geometry(std::ostream& log) {
  const RngStream base = RngStream::from_seed(0x67656f);
  const double tol = kGeometryTolerance;
  std::size_t bad_axis = 0;
  std::size_t bad_span = 0;
  std::size_t bad_circle = 0;
  std::size_t bad_rotation = 0;
  std::size_t bad_half = 0;

  {
    RngStream rng = base.derive("axis");
    for (std::size_t i = 0; i < 2000; ++i) {
      const std::size_t n = 2 + rng.next_below(5);
      const UnitVector x = sample_sphere(n, rng);
      const UnitVector x0 = sample_sphere(n, rng);
      const UnitVector r = reflect_axis(x, x0);
      const UnitVector rr = reflect_axis(r, x0);
      if (std::sqrt(squared_distance(rr.coords(), x.coords())) > tol) ++bad_axis;
      if (std::abs(norm(r.coords()) - 1.0) > tol) ++bad_axis;
      if (std::abs(dot(x0.coords(), r.coords()) -
                   dot(x0.coords(), x.coords())) > tol) {
        ++bad_axis;
      }
    }
  }
  {
    RngStream rng = base.derive("span");
    for (std::size_t i = 0; i < 2000; ++i) {
      const std::size_t n = 3 + rng.next_below(6);
      const UnitVector v1 = sample_sphere(n, rng);
      const Point x0 =
          scaled(sample_sphere(n, rng).coords(), 0.5 + rng.next_double());
      const Point res = sub(x0, scaled(v1.coords(), dot(x0, v1.coords())));
      if (norm(res) < 1e-6) continue;
      Point x(n);
      for (auto& c : x) c = rng.next_gaussian();
      const Point r = reflect_span_plane(x, x0, v1);
      const Point rr = reflect_span_plane(r, x0, v1);
      if (std::sqrt(squared_distance(rr, x)) > tol * (1.0 + norm(x))) ++bad_span;
      if (std::abs(norm(r) - norm(x)) > tol * (1.0 + norm(x))) ++bad_span;
      const Point fx0 = reflect_span_plane(x0, x0, v1);
      if (std::sqrt(squared_distance(fx0, x0)) > tol) ++bad_span;
    }
  }
  {
    RngStream rng = base.derive("circle");
    for (std::size_t i = 0; i < 2000; ++i) {
      const SphereCircle c(sample_sphere(3, rng));
      const double angle = 6.283185307179586 * rng.next_double();
      const UnitVector p = circle_point(c, angle);
      if (std::abs(norm(p.coords()) - 1.0) > tol) ++bad_circle;
      if (std::abs(dot(c.q().coords(), p.coords()) - 0.5) > tol) ++bad_circle;
    }
  }
  {
    RngStream rng = base.derive("rotation");
    for (std::size_t i = 0; i < 50; ++i) {
      const std::size_t n = 8;
      const Rotation R = random_rotation(n, rng);
      for (std::size_t a = 0; a < n; ++a) {
        Point ea(n, 0.0);
        ea[a] = 1.0;
        const Point ca = R.apply(ea);
        if (std::abs(norm(ca) - 1.0) > tol) ++bad_rotation;
        const Point back = R.apply_inverse(ca);
        if (std::sqrt(squared_distance(back, ea)) > tol) ++bad_rotation;
      }
    }
  }
  {
    RngStream rng = base.derive("half");
    for (std::size_t i = 0; i < 2000; ++i) {
      const std::size_t n = 2 + rng.next_below(8);
      const UnitVector axis = sample_sphere(n, rng);
      const UnitVector x = sample_half_sphere(n, axis, rng);
      if (dot(axis.coords(), x.coords()) < -tol) ++bad_half;
    }
  }

  log << "audit geometry: reflect_axis=" << bad_axis
      << " reflect_span_plane=" << bad_span << " circle_point=" << bad_circle
      << " rotation=" << bad_rotation << " half_sphere=" << bad_half << "\n";
  return bad_axis + bad_span + bad_circle + bad_rotation + bad_half;
}

std::size_t fuzz_attackers(std::ostream& log) {
  constexpr std::size_t kInvocations = 10000;
  const RngStream base = RngStream::from_seed(0xc1ea);
  std::size_t bad = 0;

  struct Entry {
    std::string label;
    AuditReport report;
  };
  std::vector<Entry> entries;

  const TargetedDistribution intervals = make_interval_experiment(
      IntervalHypothesis::empty(), PiecewiseDensity::uniform());
  entries.push_back({"null/intervals",
                     audit_attacker(make_null_attacker(), intervals, 50,
                                    kInvocations, base.derive("null"))});
  entries.push_back(
      {"interval_flood/intervals",
       audit_attacker(make_interval_flood_attacker(), intervals, 50,
                      kInvocations, base.derive("flood"))});
  entries.push_back(
      {"budget(interval_flood,t=2)/intervals",
       audit_attacker(make_budget_wrapper(make_interval_flood_attacker(), 2),
                      intervals, 50, kInvocations, base.derive("budget"))});

  {
    const TargetedDistribution halfsphere = make_halfsphere_experiment(8, 0.01);
    Point e1(8, 0.0);
    e1[0] = 1.0;
    entries.push_back(
        {"svm_one_point/halfsphere",
         audit_attacker(
             make_svm_one_point_attacker(UnitVector(std::move(e1)), 0.125),
             halfsphere, 20, kInvocations, base.derive("svm"))});
  }

  entries.push_back(
      {"sphere_reflection/circle_band",
       audit_attacker(
           [](const Experiment& ex) {
             return make_sphere_reflection_attacker(*ex.ctx.eta);
           },
           [](RngStream& r) { return make_circle_band_experiment(1e-3, r); },
           5, kInvocations, base.derive("circle"))});
  entries.push_back(
      {"margin_reflection/margin_lb",
       audit_attacker(
           [](const Experiment& ex) {
             return make_margin_reflection_attacker(ex.ctx);
           },
           [](RngStream& r) { return make_margin_lb_experiment(257, 0.01, r); },
           30, kInvocations, base.derive("margin"))});
  entries.push_back(
      {"circle_tpoint(t=4)/circles",
       audit_attacker(
           [](const Experiment& ex) {
             return make_circle_tpoint_attacker(4, ex.ctx);
           },
           [](RngStream& r) { return make_circles_experiment(2, 4, 30, r); },
           30, kInvocations, base.derive("tpoint"))});
  {
    const HollowStarConstruction hc = make_hollow_star_class(9);
    entries.push_back(
        {"hollow_star/finite_flip",
         audit_attacker(
             [](const Experiment& ex) {
               return make_hollow_star_attacker(ex.ctx.finite_class,
                                                *ex.ctx.i_star);
             },
             [cls = hc.cls](RngStream&) {
               return make_hollow_star_experiment(cls, 0);
             },
             4, kInvocations, base.derive("hollow"))});
  }
  entries.push_back(
      {"boundary_reflection/margin_disk",
       audit_attacker(
           [](const Experiment& ex) {
             return make_boundary_reflection_attacker(
                 *ex.ctx.w_star, ex.ctx.b_star.value_or(0.0));
           },
           [](RngStream& r) { return make_margin_disk_experiment(2, 0.25, r); },
           40, kInvocations, base.derive("disk"))});

  for (const auto& entry : entries) {
    const auto& r = entry.report;
    log << "audit attacker " << entry.label
        << ": invocations=" << r.invocations
        << " nonempty=" << r.nonempty_poisons
        << " clean_violations=" << r.clean_label_violations
        << " budget_violations=" << r.budget_violations
        << " errors=" << r.errors.size() << "\n";
    bad += r.clean_label_violations + r.budget_violations + r.errors.size();
  }
  return bad;
}

std::size_t fuzz_symmetry(std::ostream& log) {
  const RngStream base = RngStream::from_seed(0x5577);
  std::size_t bad = 0;
  {
    const SymmetryReport r = symmetry_audit_circle(100, base.derive("circle"));
    log << "audit symmetry circle: attempted=" << r.attempted
        << " fired=" << r.fired << " mismatches=" << r.mismatches
        << " max_deviation=" << r.max_deviation << "\n";
    if (!r.passed(100)) ++bad;
  }
  {
    const SymmetryReport r =
        symmetry_audit_halfsphere(100, base.derive("halfsphere"));
    log << "audit symmetry halfsphere: attempted=" << r.attempted
        << " fired=" << r.fired << " mismatches=" << r.mismatches
        << " max_deviation=" << r.max_deviation << "\n";
    if (!r.passed(100)) ++bad;
  }
  return bad;
}

}  // namespace

int run_audits(const std::string& scope, std::ostream& log) {
  const bool all = scope == "all";
  if (!all && scope != "attackers" && scope != "geometry" &&
      scope != "symmetry") {
    log << "unknown audit scope '" << scope
        << "' (expected all|attackers|geometry|symmetry)\n";
    return 2;
  }
  std::size_t bad = 0;
  if (all || scope == "geometry") bad += fuzz_geometry(log);
  if (all || scope == "attackers") bad += fuzz_attackers(log);
  if (all || scope == "symmetry") bad += fuzz_symmetry(log);
  if (bad > 0) {
    log << "AUDIT FAILURES: " << bad << "\n";
    return 3;
  }
  log << "all audits passed\n";
  return 0;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

int make_table(const std::vector<std::string>& files,
               const std::vector<std::string>& group_by, std::ostream& out) {
  struct Agg {
    std::size_t rows = 0;
    double atk = 0.0;
    double err = 0.0;
    double violations = 0.0;
  };
  std::map<std::vector<std::string>, Agg> groups;

  for (const std::string& file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
      out << "cannot read " << file << "\n";
      return 2;
    }
    std::string line;
    if (!std::getline(in, line)) {
      out << "empty file " << file << "\n";
      return 2;
    }
    const std::vector<std::string> header = split_csv_line(line);
    auto column = [&](const std::string& name) -> std::optional<std::size_t> {
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
      }
      return std::nullopt;
    };
    std::vector<std::size_t> key_cols;
    for (const std::string& g : group_by) {
      const auto idx = column(g);
      if (!idx) {
        out << "file " << file << " has no column '" << g << "'\n";
        return 2;
      }
      key_cols.push_back(*idx);
    }
    const auto atk_col = column("atk_mean");
    const auto err_col = column("err_mean");
    const auto viol_col = column("audit_violations");
    if (!atk_col || !err_col || !viol_col) {
      out << "file " << file << " is not a results.csv\n";
      return 2;
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const std::vector<std::string> fields = split_csv_line(line);
      if (fields.size() != header.size()) {
        out << "file " << file << " has a malformed row\n";
        return 2;
      }
      std::vector<std::string> key;
      for (std::size_t idx : key_cols) key.push_back(fields[idx]);
      Agg& agg = groups[key];
      ++agg.rows;
      agg.atk += std::strtod(fields[*atk_col].c_str(), nullptr);
      agg.err += std::strtod(fields[*err_col].c_str(), nullptr);
      agg.violations += std::strtod(fields[*viol_col].c_str(), nullptr);
    }
  }

  std::vector<std::string> head = group_by;
  if (head.empty()) head.push_back("group");
  head.insert(head.end(), {"rows", "atk_mean", "err_mean", "violations"});

  std::vector<std::vector<std::string>> body;
  for (const auto& [key, agg] : groups) {
    std::vector<std::string> row = key;
    if (key.empty()) row.push_back("(all)");
    char buf[64];
    row.push_back(std::to_string(agg.rows));
    std::snprintf(buf, sizeof(buf), "%.6g", agg.atk / agg.rows);
    row.emplace_back(buf);
    std::snprintf(buf, sizeof(buf), "%.6g", agg.err / agg.rows);
    row.emplace_back(buf);
    std::snprintf(buf, sizeof(buf), "%.6g", agg.violations);
    row.emplace_back(buf);
    body.push_back(std::move(row));
  }

  std::vector<std::size_t> widths(head.size(), 0);
  for (std::size_t i = 0; i < head.size(); ++i) widths[i] = head[i].size();
  for (const auto& row : body) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      widths[i] = std::max(widths[i], row[i].size());
    }
  }
  auto print_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << row[i];
      if (i + 1 < row.size()) {
        out << std::string(widths[i] - row[i].size() + 2, ' ');
      }
    }
    out << "\n";
  };
  print_row(head);
  for (const auto& row : body) print_row(row);
  return 0;
}

}  // namespace cleanlabel
