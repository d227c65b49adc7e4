#include "betalab/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "betalab/error.hpp"

namespace betalab {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  const auto res = std::to_chars(buf, buf + sizeof buf, h, 16);
  std::string s(buf, res.ptr);
  return std::string(16 - s.size(), '0') + s;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp" + hex64(fnv1a(path.string()) ^ static_cast<std::uint64_t>(content.size()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

double parse_double(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidArgument("line " + std::to_string(line) + ": not a number: '" + std::string(s) + "'");
  return v;
}

struct Table {
  std::string header;
  std::vector<std::vector<double>> rows;
};

Table parse_csv(std::string_view text, std::size_t columns) {
  Table t;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (t.header.empty()) {
      t.header = std::string(line);
      continue;
    }
    std::vector<double> row;
    while (true) {
      const auto comma = line.find(',');
      row.push_back(parse_double(line.substr(0, comma), line_no));
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (row.size() != columns)
      throw InvalidArgument("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " columns");
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw InvalidArgument("CSV has no header");
  return t;
}

}  // namespace

std::string measure_to_csv(const Measure& mu) {
  std::string out;
  if (const auto* a = std::get_if<AtomicMeasure>(&mu)) {
    out = "position,weight\n";
    for (std::size_t i = 0; i < a->size(); ++i)
      out += format_double(a->atoms()[i]) + ',' + format_double(a->weights()[i]) + '\n';
  } else {
    const auto& g = std::get<GridMeasure>(mu);
    out = "position,density\n";
    for (std::size_t i = 0; i <= g.intervals(); ++i)
      out += format_double(g.node(i)) + ',' + format_double(g.values()[i]) + '\n';
  }
  return out;
}

Measure measure_from_csv(std::string_view text) {
  const Table t = parse_csv(text, 2);
  std::vector<double> x, y;
  for (const auto& r : t.rows) {
    x.push_back(r[0]);
    y.push_back(r[1]);
  }
  if (t.header == "position,weight") return AtomicMeasure(std::move(x), std::move(y));
  if (t.header == "position,density") {
    if (x.size() < 3) throw InvalidArgument("grid CSV needs at least three nodes");
    return GridMeasure(x.front(), x.back(), std::move(y));
  }
  throw InvalidArgument("unknown measure CSV header '" + t.header + "'");
}

Json measure_to_json(const Measure& mu) {
  Json j;
  if (const auto* a = std::get_if<AtomicMeasure>(&mu)) {
    j["kind"] = "atomic";
    j["support"] = {a->atoms().front(), a->atoms().back()};
    j["atoms"] = std::vector<double>(a->atoms().begin(), a->atoms().end());
    j["weights"] = std::vector<double>(a->weights().begin(), a->weights().end());
  } else {
    const auto& g = std::get<GridMeasure>(mu);
    j["kind"] = "grid";
    j["support"] = {g.lo(), g.hi()};
    j["values"] = std::vector<double>(g.values().begin(), g.values().end());
  }
  return j;
}

Measure measure_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "atomic")
    return AtomicMeasure(j.at("atoms").get<std::vector<double>>(), j.at("weights").get<std::vector<double>>());
  if (kind == "grid") {
    const auto sup = j.at("support").get<std::vector<double>>();
    if (sup.size() != 2) throw InvalidArgument("grid measure JSON: support must have two entries");
    return GridMeasure(sup[0], sup[1], j.at("values").get<std::vector<double>>());
  }
  throw InvalidArgument("unknown measure kind '" + kind + "'");
}

Json equilibrium_to_json(const EquilibriumResult& eq, const Potential& v) {
  Json j;
  j["potential"] = v.to_string();
  j["a_v"] = eq.a;
  j["b_v"] = eq.b;
  j["c_v"] = eq.c_v;
  j["sigma"] = eq.sigma;
  j["potential_energy"] = eq.potential_energy;
  j["sigma_grid"] = eq.sigma_grid;
  j["potential_energy_grid"] = eq.potential_energy_grid;
  j["h_coefficients"] = eq.h.coeffs();
  j["newton_iterations"] = eq.newton_iterations;
  j["endpoint_residual"] = eq.endpoint_residual;
  j["grid_intervals"] = eq.density.intervals();
  return j;
}

std::string equilibrium_density_csv(const EquilibriumResult& eq) {
  std::string out = "x,density\n";
  for (std::size_t i = 0; i <= eq.density.intervals(); ++i) {
    const double x = eq.density.node(i);
    out += format_double(x) + ',' + format_double(eq.density_at(x)) + '\n';
  }
  return out;
}

std::string sample_to_csv(const SpectrumSample& s) {
  std::string out = "index,eigenvalue\n";
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
    out += std::to_string(i + 1) + ',' + format_double(s.eigenvalues[i]) + '\n';
  return out;
}

Json sample_to_json(const SpectrumSample& s) {
  Json j;
  j["n"] = s.n;
  j["beta"] = s.beta;
  j["potential"] = s.potential;
  j["seed"] = s.seed;
  j["replica"] = s.replica;
  j["method"] = to_string(s.method);
  // The exact sampler has no accept/reject step.
  j["acceptance_rate"] = s.method == SampleMethod::mcmc ? Json(s.acceptance_rate) : Json(nullptr);
  if (s.method == SampleMethod::mcmc) {
    j["step"] = s.step;
    j["sweeps"] = s.sweeps;
  }
  j["ties_perturbed"] = s.ties_perturbed;
  j["lambda_max"] = s.lambda_max();
  return j;
}

SpectrumSample sample_from_files(std::string_view csv, const Json& sidecar) {
  const Table t = parse_csv(csv, 2);
  if (t.header != "index,eigenvalue") throw InvalidArgument("sample CSV: unexpected header '" + t.header + "'");
  SpectrumSample s;
  for (const auto& r : t.rows) s.eigenvalues.push_back(r[1]);
  s.n = sidecar.at("n").get<int>();
  if (static_cast<std::size_t>(s.n) != s.eigenvalues.size())
    throw InvalidArgument("sample CSV: row count does not match n");
  s.beta = sidecar.at("beta").get<double>();
  s.potential = sidecar.at("potential").get<std::string>();
  s.seed = sidecar.at("seed").get<std::uint64_t>();
  s.replica = sidecar.value("replica", std::uint64_t{0});
  s.method = sidecar.at("method").get<std::string>() == "mcmc" ? SampleMethod::mcmc : SampleMethod::tridiagonal;
  if (const auto it = sidecar.find("acceptance_rate"); it != sidecar.end() && it->is_number())
    s.acceptance_rate = it->get<double>();
  s.step = sidecar.value("step", 0.0);
  s.sweeps = sidecar.value("sweeps", std::size_t{0});
  s.ties_perturbed = sidecar.value("ties_perturbed", 0);
  return s;
}

Json rate_to_json(const RateEvaluation& r, std::string_view inputs_hash) {
  Json j;
  j["functional"] = r.functional;
  j["inputs_hash"] = std::string(inputs_hash);
  j["terms"] = {{"neg_sigma", r.sigma_term}, {"potential", r.potential_term}, {"c_v", r.c_v}, {"offset", r.offset}};
  j["value"] = r.value;
  if (r.regularization) j["M"] = *r.regularization;
  else j["M"] = nullptr;
  return j;
}

}  // namespace betalab
