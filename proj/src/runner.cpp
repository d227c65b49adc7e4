#include "betalab/runner.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <set>
#include <sstream>

#include "betalab/dos.hpp"
#include "betalab/equilibrium.hpp"
#include "betalab/numeric.hpp"
#include "betalab/potential.hpp"
#include "betalab/rates.hpp"
#include "betalab/sampler.hpp"

namespace betalab {

namespace {

const std::set<std::string> kCommands{"equilibrium", "sample", "rate", "dos-converge", "fluctuate", "tail-scan"};
const std::set<std::string> kFunctionals{"iv", "cali", "idos", "calj", "projection"};
const std::set<std::string> kKeys{"command", "functional", "potential", "beta", "n", "replicas", "seed",
                                  "grid", "out", "reg-m", "threads", "measure", "c", "f", "window",
                                  "cutoffs", "cells", "gap-tol", "sweeps", "burn-in", "step", "cache"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(const std::string& field, std::string_view text) {
  text = trim(text);
  T v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError(field, "cannot parse '" + std::string(text) + "' as a number");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& field, std::string_view text) {
  std::vector<T> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(parse_number<T>(field, text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>)
      s += format_double(xs[i]);
    else
      s += std::to_string(xs[i]);
  }
  return s;
}

McmcOptions mcmc_options(const ExperimentConfig& c) {
  McmcOptions m;
  m.sweeps = c.sweeps;
  m.burn_in = c.burn_in;
  m.step = c.step;
  return m;
}

EquilibriumOptions eq_options(const ExperimentConfig& c) {
  EquilibriumOptions o;
  o.grid = c.grid;
  return o;
}

ConstrainedOptions constrained_options(const ExperimentConfig& c) {
  ConstrainedOptions o;
  o.cells = c.cells;
  o.gap_tol = c.gap_tol;
  return o;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

struct Artifacts {
  std::filesystem::path dir;
  std::vector<std::string> files;

  void write(const std::string& name, std::string_view content) {
    write_atomic(dir / name, content);
    files.push_back(name);
  }
};

Measure resolve_measure(const std::string& name, const EquilibriumResult& eq, const char* fallback) {
  const std::string s = name.empty() ? fallback : name;
  if (s == "nu_V") return nu_limit(eq);
  if (s == "mu_V") return eq.density;
  const std::filesystem::path p(s);
  if (!std::filesystem::exists(p)) throw ConfigError("measure", "expected nu_V, mu_V or an existing file, got '" + s + "'");
  const std::string text = read_file(p);
  if (p.extension() == ".json") return measure_from_json(Json::parse(text));
  return measure_from_csv(text);
}

Json run_equilibrium(const ExperimentConfig& c, Artifacts& art, std::ostream& out) {
  const Potential v = Potential::parse(c.potential);
  const auto eq = solve_equilibrium(v, eq_options(c));
  art.write("density.csv", equilibrium_density_csv(eq));
  out << "a_V = " << format_double(eq.a) << "\nb_V = " << format_double(eq.b) << "\nc_V = " << format_double(eq.c_v)
      << '\n';
  return equilibrium_to_json(eq, v);
}

std::string sample_key(const ExperimentConfig& c, int n, std::size_t r) {
  const std::string k = c.potential + '|' + format_double(c.beta) + '|' + std::to_string(n) + '|' +
                        std::to_string(c.seed) + '|' + std::to_string(r) + '|' +
                        (c.sweeps ? std::to_string(*c.sweeps) : "-") + '|' +
                        (c.burn_in ? std::to_string(*c.burn_in) : "-") + '|' + (c.step ? format_double(*c.step) : "-");
  return hex64(fnv1a(k));
}

Json run_sample(const ExperimentConfig& c, Artifacts& art, std::ostream& out) {
  const Potential v = Potential::parse(c.potential);
  Json levels = Json::array();
  for (int n : c.sizes) {
    std::vector<SpectrumSample> samples(c.replicas);
    std::vector<char> cached(c.replicas, 0);
    parallel_for(c.replicas, c.threads, [&](std::size_t r) {
      if (c.cache) {
        const auto base = *c.cache / sample_key(c, n, r);
        auto csv = base, js = base;
        csv += ".csv";
        js += ".json";
        if (std::filesystem::exists(csv) && std::filesystem::exists(js)) {
          samples[r] = sample_from_files(read_file(csv), Json::parse(read_file(js)));
          cached[r] = 1;
          return;
        }
        samples[r] = sample_spectrum(v, c.beta, n, c.seed, r, mcmc_options(c));
        write_atomic(csv, sample_to_csv(samples[r]));
        write_atomic(js, sample_to_json(samples[r]).dump(2) + '\n');
        return;
      }
      samples[r] = sample_spectrum(v, c.beta, n, c.seed, r, mcmc_options(c));
    });
    std::vector<double> top;
    std::string table = "n,replica,lambda_max,acceptance_rate\n";
    std::size_t hits = 0;
    for (std::size_t r = 0; r < c.replicas; ++r) {
      const auto& s = samples[r];
      const std::string stem = "sample_n" + std::to_string(n) + "_r" + std::to_string(r);
      art.write(stem + ".csv", sample_to_csv(s));
      art.write(stem + ".json", sample_to_json(s).dump(2) + '\n');
      top.push_back(s.lambda_max());
      table += std::to_string(n) + ',' + std::to_string(r) + ',' + format_double(s.lambda_max()) + ',' +
               format_double(s.acceptance_rate) + '\n';
      hits += cached[r] ? 1 : 0;
    }
    art.write("lambda_max_n" + std::to_string(n) + ".csv", table);
    const auto m = sample_moments(top);
    levels.push_back({{"n", n},
                      {"method", to_string(samples.front().method)},
                      {"mean_lambda_max", m.mean},
                      {"cache_hits", hits}});
    out << "N = " << n << ": mean lambda_max = " << format_double(m.mean) << '\n';
  }
  return {{"levels", levels}};
}

Json run_rate(const ExperimentConfig& c, Artifacts& art, std::ostream& out) {
  const Potential v = Potential::parse(c.potential);
  const auto eq = solve_equilibrium(v, eq_options(c));
  RateOptions ro;
  ro.reg_m = c.reg_m;
  const std::string& fn = c.functional;

  if (fn == "projection") {
    if (!c.c) throw ConfigError("c", "required for the projection functional");
    const double value = projection_j(eq, v, *c.c, constrained_options(c));
    out << "J_V(" << format_double(*c.c) << ") = " << format_double(value) << '\n';
    art.write("rate.csv", "c,value\n" + format_double(*c.c) + ',' + format_double(value) + '\n');
    return {{"functional", "projection"}, {"c", *c.c}, {"b_v", eq.b}, {"value", value}};
  }

  const Measure mu = resolve_measure(c.measure, eq, fn == "iv" ? "mu_V" : "nu_V");
  RateEvaluation r;
  Json extra = Json::object();
  if (fn == "iv") {
    r = rate_iv(eq, v, mu, ro);
  } else if (fn == "cali") {
    r = rate_cal_i(eq, v, c.c.value_or(eq.b), mu, ro);
  } else if (fn == "idos") {
    r = rate_idos(eq, v, mu, ro);
    if (v.is_gaussian()) extra["gaussian_shortcut"] = rate_idos_gaussian(mu, ro).value;
    extra["kappa"] = kappa(v, mu);
  } else {
    if (!c.c) throw ConfigError("c", "required for the calj functional");
    if (!(*c.c < eq.b)) throw ConfigError("c", "must be below b_V = " + format_double(eq.b));
    const auto con = constrained_equilibrium(v, eq, *c.c, constrained_options(c));
    if (!con.converged) throw ConvergenceError("constrained equilibrium did not reach its duality gap", con.gap);
    r = rate_cal_j(eq, v, con, mu, ro);
  }
  const std::string hash =
      hex64(fnv1a(c.potential + '|' + fn + '|' + measure_to_csv(mu) + '|' + (c.c ? format_double(*c.c) : "-") + '|' +
                  (c.reg_m ? format_double(*c.reg_m) : "-")));
  Json j = rate_to_json(r, hash);
  for (auto& [k, val] : extra.items()) j[k] = val;
  art.write("rate.csv", "functional,value\n" + r.functional + ',' + format_double(r.value) + '\n');
  out << r.functional << " = " << format_double(r.value) << '\n';
  return j;
}

Json run_dos_converge(const ExperimentConfig& c, Artifacts& art, std::ostream& out) {
  const Potential v = Potential::parse(c.potential);
  const auto eq = solve_equilibrium(v, eq_options(c));
  const auto levels = dos_convergence(v, eq, c.beta, c.sizes, c.replicas, c.seed, c.threads, mcmc_options(c));
  std::string summary_csv = "n,mean_w1,sd_w1\n", replica_csv = "n,replica,w1\n";
  Json jl = Json::array();
  bool decreasing = true;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& l = levels[i];
    const auto m = sample_moments(l.w1);
    const double sd = l.w1.size() > 1 ? std::sqrt(m.variance) : 0.0;
    summary_csv += std::to_string(l.n) + ',' + format_double(l.mean_w1) + ',' + format_double(sd) + '\n';
    for (std::size_t r = 0; r < l.w1.size(); ++r)
      replica_csv += std::to_string(l.n) + ',' + std::to_string(r) + ',' + format_double(l.w1[r]) + '\n';
    if (i > 0 && !(l.mean_w1 < levels[i - 1].mean_w1)) decreasing = false;
    jl.push_back({{"n", l.n}, {"mean_w1", l.mean_w1}, {"sd_w1", sd}});
    out << "N = " << l.n << ": mean W1 = " << format_double(l.mean_w1) << '\n';
  }
  art.write("dos_converge.csv", summary_csv);
  art.write("dos_converge_replicas.csv", replica_csv);
  return {{"levels", jl}, {"strictly_decreasing", decreasing}};
}

Json run_fluctuate(const ExperimentConfig& c, Artifacts& art, std::ostream& out) {
  const Potential v = Potential::parse(c.potential);
  const auto eq = solve_equilibrium(v, eq_options(c));
  const TestFunction f = TestFunction::polynomial(parse_list<double>("f", c.f));
  FluctuationConfig fc;
  fc.beta = c.beta;
  fc.sizes = c.sizes;
  fc.replicas = c.replicas;
  fc.seed = c.seed;
  fc.threads = c.threads;
  fc.window = c.window;
  fc.mcmc = mcmc_options(c);
  const auto rep = fluctuation_ensemble(v, eq, f, fc);

  const auto coeffs = cheb_coefficients(f.f, eq.a, eq.b, 64);
  const auto var = clt_variance(coeffs, c.beta);
  Json j{{"regime", to_string(rep.regime)},
         {"ambiguous", rep.ambiguous},
         {"nu_f", rep.nu_f},
         {"nu_df", rep.nu_df},
         {"remainder_constant", rep.remainder_constant},
         {"clt_variance", var.value},
         {"clt_variance_tail", var.tail}};
  if (v.is_gaussian()) {
    const double bias = gaussian_bias(v, f.f, c.beta);
    j["bias"] = bias;
    j["predicted_centered_mean"] = -f.f(0.0) + bias;
  }

  std::string rows = "n,replica,statistic,centered,lambda_max\n";
  std::string levels = "n,mean,variance,centered_mean,centered_variance,window_violation_rate,"
                       "remainder_bound_failures,max_identity_residual\n";
  std::string hist = "n,bin_left,bin_right,count\n";
  Json jl = Json::array();
  for (const auto& l : rep.levels) {
    const std::string n = std::to_string(l.n);
    for (std::size_t r = 0; r < l.statistic.size(); ++r)
      rows += n + ',' + std::to_string(r) + ',' + format_double(l.statistic[r]) + ',' + format_double(l.centered[r]) +
              ',' + format_double(l.lambda_max[r]) + '\n';
    levels += n + ',' + format_double(l.statistic_moments.mean) + ',' + format_double(l.statistic_moments.variance) +
              ',' + format_double(l.centered_moments.mean) + ',' + format_double(l.centered_moments.variance) + ',' +
              format_double(l.window_violation_rate) + ',' + std::to_string(l.remainder_bound_failures) + ',' +
              format_double(l.max_identity_residual) + '\n';
    for (std::size_t b = 0; b < l.histogram.counts.size(); ++b)
      hist += n + ',' + format_double(l.histogram.edges[b]) + ',' + format_double(l.histogram.edges[b + 1]) + ',' +
              std::to_string(l.histogram.counts[b]) + '\n';
    jl.push_back({{"n", l.n},
                  {"statistic_mean", l.statistic_moments.mean},
                  {"statistic_variance", l.statistic_moments.variance},
                  {"centered_mean", l.centered_moments.mean},
                  {"centered_variance", l.centered_moments.variance},
                  {"window_violation_rate", l.window_violation_rate},
                  {"remainder_bound_failures", l.remainder_bound_failures},
                  {"max_identity_residual", l.max_identity_residual}});
    out << "N = " << l.n << ": mean " << format_double(l.statistic_moments.mean) << ", variance "
        << format_double(l.statistic_moments.variance) << " (" << to_string(rep.regime) << " scaling)\n";
  }
  std::string ks = "n1,n2,ks\n";
  Json jk = Json::array();
  for (const auto& p : rep.ks) {
    ks += std::to_string(p.n1) + ',' + std::to_string(p.n2) + ',' + format_double(p.distance) + '\n';
    jk.push_back({{"n1", p.n1}, {"n2", p.n2}, {"ks", p.distance}});
  }
  art.write("fluctuation_replicas.csv", rows);
  art.write("fluctuation_levels.csv", levels);
  art.write("fluctuation_histogram.csv", hist);
  art.write("fluctuation_ks.csv", ks);
  j["levels"] = jl;
  j["ks"] = jk;
  return j;
}

Json run_tail_scan(const ExperimentConfig& c, Artifacts& art, std::ostream& out) {
  const Potential v = Potential::parse(c.potential);
  const auto eq = solve_equilibrium(v, eq_options(c));
  std::vector<double> xs = c.cutoffs;
  if (xs.empty()) {
    const double w = eq.b - eq.a;
    for (int i = 0; i <= 16; ++i) xs.push_back(eq.b - 0.5 * w + w * i / 16.0);
  }
  std::vector<double> rate(xs.size()), gap(xs.size(), 0.0);
  parallel_for(xs.size(), c.threads, [&](std::size_t i) {
    if (xs[i] >= eq.b) {
      rate[i] = effective_potential_tail(eq, v, xs[i]);
      return;
    }
    const auto res = constrained_equilibrium(v, eq, xs[i], constrained_options(c));
    if (!res.converged)
      throw ConvergenceError("constrained equilibrium at x = " + format_double(xs[i]) + " did not converge", res.gap);
    rate[i] = res.value;
    gap[i] = res.gap;
  });
  std::string csv = "x,rate\n";
  Json pts = Json::array();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    csv += format_double(xs[i]) + ',' + format_double(rate[i]) + '\n';
    pts.push_back({{"x", xs[i]}, {"side", xs[i] < eq.b ? "left" : "right"}, {"rate", rate[i]}, {"gap", gap[i]}});
    out << "x = " << format_double(xs[i]) << ": " << format_double(rate[i]) << '\n';
  }
  art.write("tail_scan.csv", csv);
  return {{"b_v", eq.b}, {"points", pts}};
}

}  // namespace

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config", "line " + std::to_string(line_no) + ": expected key = value");
    std::string key(trim(line.substr(0, eq)));
    if (key == "N") key = "n";
    kv[key] = std::string(trim(line.substr(eq + 1)));
  }
  return kv;
}

ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv) {
  for (const auto& [k, _] : kv)
    if (!kKeys.contains(k)) throw ConfigError(k, "unknown key");
  ExperimentConfig c;
  auto get = [&](const char* k) -> const std::string* {
    const auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };

  if (const auto* s = get("command")) c.command = *s;
  if (!kCommands.contains(c.command)) throw ConfigError("command", "unknown command '" + c.command + "'");
  if (const auto* s = get("functional")) c.functional = *s;
  if (c.command == "rate" && !kFunctionals.contains(c.functional))
    throw ConfigError("functional", "expected one of iv, cali, idos, calj, projection");

  if (const auto* s = get("potential")) c.potential = *s;
  try {
    c.potential = Potential::parse(c.potential).to_string();
  } catch (const InvalidArgument& e) {
    std::string_view msg = e.what();
    if (msg.starts_with("potential: ")) msg.remove_prefix(11);
    throw ConfigError("potential", std::string(msg));
  }
  if (const auto* s = get("beta")) c.beta = parse_number<double>("beta", *s);
  if (!(c.beta > 0.0)) throw ConfigError("beta", "must be positive");
  if (const auto* s = get("n")) c.sizes = parse_list<int>("n", *s);
  for (int n : c.sizes)
    if (n < 2) throw ConfigError("n", "every N must be at least 2");
  if (const auto* s = get("replicas")) c.replicas = parse_number<std::size_t>("replicas", *s);
  if (c.replicas < 1) throw ConfigError("replicas", "must be at least 1");
  if (c.command == "fluctuate" && c.replicas < 2) throw ConfigError("replicas", "fluctuate needs at least 2");
  if (const auto* s = get("seed")) c.seed = parse_number<std::uint64_t>("seed", *s);
  if (const auto* s = get("grid")) c.grid = parse_number<std::size_t>("grid", *s);
  if (c.grid < 16) throw ConfigError("grid", "must be at least 16");
  if (const auto* s = get("out")) c.out = *s;
  if (c.out.empty()) throw ConfigError("out", "must not be empty");
  if (const auto* s = get("reg-m")) {
    c.reg_m = parse_number<double>("reg-m", *s);
    if (!(*c.reg_m > 0.0)) throw ConfigError("reg-m", "must be positive");
  }
  if (const auto* s = get("threads")) c.threads = parse_number<unsigned>("threads", *s);
  if (const auto* s = get("measure")) c.measure = *s;
  if (const auto* s = get("c")) c.c = parse_number<double>("c", *s);
  if (const auto* s = get("f")) c.f = *s;
  parse_list<double>("f", c.f);
  if (const auto* s = get("window")) c.window = parse_number<double>("window", *s);
  if (!(c.window > 0.0)) throw ConfigError("window", "must be positive");
  if (const auto* s = get("cutoffs"); s && !trim(*s).empty()) c.cutoffs = parse_list<double>("cutoffs", *s);
  if (const auto* s = get("cells")) c.cells = parse_number<std::size_t>("cells", *s);
  if (c.cells < 10) throw ConfigError("cells", "must be at least 10");
  if (const auto* s = get("gap-tol")) c.gap_tol = parse_number<double>("gap-tol", *s);
  if (!(c.gap_tol > 0.0)) throw ConfigError("gap-tol", "must be positive");
  if (const auto* s = get("sweeps")) c.sweeps = parse_number<std::size_t>("sweeps", *s);
  if (const auto* s = get("burn-in")) c.burn_in = parse_number<std::size_t>("burn-in", *s);
  if (c.sweeps && c.burn_in && *c.sweeps < *c.burn_in) throw ConfigError("sweeps", "must be at least burn-in");
  if (const auto* s = get("step")) {
    c.step = parse_number<double>("step", *s);
    if (!(*c.step > 0.0)) throw ConfigError("step", "must be positive");
  }
  if (const auto* s = get("cache"); s && !s->empty()) c.cache = *s;
  return c;
}

std::map<std::string, std::string> config_to_map(const ExperimentConfig& c) {
  std::map<std::string, std::string> kv{{"command", c.command},
                                        {"potential", c.potential},
                                        {"beta", format_double(c.beta)},
                                        {"n", join(c.sizes)},
                                        {"replicas", std::to_string(c.replicas)},
                                        {"seed", std::to_string(c.seed)},
                                        {"grid", std::to_string(c.grid)},
                                        {"out", c.out.string()},
                                        {"threads", std::to_string(c.threads)},
                                        {"f", c.f},
                                        {"window", format_double(c.window)},
                                        {"cells", std::to_string(c.cells)},
                                        {"gap-tol", format_double(c.gap_tol)}};
  if (!c.functional.empty()) kv["functional"] = c.functional;
  if (c.reg_m) kv["reg-m"] = format_double(*c.reg_m);
  if (!c.measure.empty()) kv["measure"] = c.measure;
  if (c.c) kv["c"] = format_double(*c.c);
  if (!c.cutoffs.empty()) kv["cutoffs"] = join(c.cutoffs);
  if (c.sweeps) kv["sweeps"] = std::to_string(*c.sweeps);
  if (c.burn_in) kv["burn-in"] = std::to_string(*c.burn_in);
  if (c.step) kv["step"] = format_double(*c.step);
  if (c.cache) kv["cache"] = c.cache->string();
  return kv;
}

Json config_to_json(const ExperimentConfig& c) {
  Json j = Json::object();
  for (const auto& [k, v] : config_to_map(c)) j[k] = v;
  return j;
}

int run(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  Artifacts art{c.out, {}};
  const auto start = std::chrono::steady_clock::now();
  try {
    Json result;
    if (c.command == "equilibrium") result = run_equilibrium(c, art, out);
    else if (c.command == "sample") result = run_sample(c, art, out);
    else if (c.command == "rate") result = run_rate(c, art, out);
    else if (c.command == "dos-converge") result = run_dos_converge(c, art, out);
    else if (c.command == "fluctuate") result = run_fluctuate(c, art, out);
    else result = run_tail_scan(c, art, out);

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Json summary{{"command", c.command},
                 {"config", config_to_json(c)},
                 {"result", result},
                 {"artifacts", art.files},
                 {"runtime_seconds", seconds},
                 {"timestamp", timestamp()}};
    write_atomic(c.out / "summary.json", summary.dump(2) + '\n');
    return 0;
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const ConvergenceError& e) {
    err << "did not converge: " << e.what() << " (last residual " << format_double(e.residual()) << ")\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical experiments on beta-ensembles near the largest eigenvalue"};
  app.fallthrough();
  app.require_subcommand(1);

  std::map<std::string, std::string> flags;
  std::string config_path;
  app.add_option("--config", config_path, "flat key = value file; flags override it");
  struct Flag {
    const char* names;
    const char* key;
    const char* help;
  };
  const Flag table[] = {
      {"--potential", "potential", "V coefficients c0,c1,... in ascending powers"},
      {"--beta", "beta", "inverse temperature"},
      {"--n,--N", "n", "matrix size, or a comma list of sizes"},
      {"--replicas", "replicas", "independent samples per size"},
      {"--seed", "seed", "root seed"},
      {"--grid", "grid", "intervals of the equilibrium density grid"},
      {"--out", "out", "output directory"},
      {"--reg-m", "reg-m", "log-energy cap M for atomic measures"},
      {"--threads", "threads", "worker threads, 0 for all cores"},
      {"--measure", "measure", "nu_V, mu_V or a measure CSV/JSON file"},
      {"--c", "c", "cutoff c"},
      {"--f", "f", "test function coefficients in ascending powers"},
      {"--window", "window", "window half-width H around the support"},
      {"--cutoffs", "cutoffs", "comma list of points for tail-scan"},
      {"--cells", "cells", "cells of the constrained solver"},
      {"--gap-tol", "gap-tol", "duality-gap tolerance of the constrained solver"},
      {"--sweeps", "sweeps", "total Metropolis sweeps"},
      {"--burn-in", "burn-in", "Metropolis burn-in sweeps"},
      {"--step", "step", "initial Metropolis step"},
      {"--cache", "cache", "sample cache directory"},
  };
  std::map<std::string, std::string> values;
  std::vector<std::pair<CLI::Option*, std::string>> opts;
  for (const auto& f : table) opts.emplace_back(app.add_option(f.names, values[f.key], f.help), f.key);

  for (const auto& name : kCommands) app.add_subcommand(name, "");
  std::string functional;
  app.get_subcommand("rate")->add_option("functional", functional, "iv | cali | idos | calj | projection")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "invalid arguments: " << e.what() << '\n';
    return 2;
  }

  try {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) kv = parse_config_text(read_file(config_path));
    for (const auto& [opt, key] : opts)
      if (opt->count() > 0) kv[key] = values[key];
    kv["command"] = app.get_subcommands().front()->get_name();
    if (!functional.empty()) kv["functional"] = functional;
    return run(config_from_map(kv), out, err);
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    err << "invalid config: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace betalab
