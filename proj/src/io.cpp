#include "dispersia/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "dispersia/errors.hpp"

namespace dispersia {

namespace fs = std::filesystem;

namespace {

std::string join(const std::string& field, const std::string& key) { return field.empty() ? key : field + "." + key; }

std::string index(const std::string& field, std::size_t i) { return field + "[" + std::to_string(i) + "]"; }

void require_object(const Json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field.empty() ? "document" : field, "must be an object");
}

void check_keys(const Json& j, const std::string& field, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(join(field, key), "unknown field");
  }
}

double number(const Json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

double number_at(const Json& obj, const char* key, const std::string& field, std::optional<double> fallback = {}) {
  if (!obj.contains(key) || obj.at(key).is_null()) {
    if (fallback) return *fallback;
    throw ConfigError(join(field, key), "is required");
  }
  return number(obj.at(key), join(field, key));
}

double positive_at(const Json& obj, const char* key, const std::string& field, std::optional<double> fallback = {}) {
  const double v = number_at(obj, key, field, fallback);
  if (!(v > 0.0)) throw ConfigError(join(field, key), "must be positive");
  return v;
}

long integer_at(const Json& obj, const char* key, const std::string& field, std::optional<long> fallback = {}) {
  const std::string f = join(field, key);
  if (!obj.contains(key) || obj.at(key).is_null()) {
    if (fallback) return *fallback;
    throw ConfigError(f, "is required");
  }
  const Json& v = obj.at(key);
  if (v.is_number_integer()) return v.get<long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 1e15) return static_cast<long>(d);
  }
  throw ConfigError(f, "must be an integer");
}

std::vector<double> number_array(const Json& obj, const char* key, const std::string& field) {
  std::vector<double> out;
  if (!obj.contains(key) || obj.at(key).is_null()) return out;
  const Json& a = obj.at(key);
  const std::string f = join(field, key);
  if (!a.is_array()) throw ConfigError(f, "must be an array of numbers");
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(number(a[i], index(f, i)));
  return out;
}

template <class F>
auto with_field(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const KernelError& e) {
    throw ConfigError(field, e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

Json load_json(const fs::path& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(field, "'" + path.string() + "': " + e.what());
  }
}

Kernel parse_kernel(const Json& doc, const std::string& field, const fs::path& base) {
  if (doc.is_null()) return ExpPolyKernel{};
  if (doc.is_string()) {
    const fs::path p = base / doc.get<std::string>();
    return parse_kernel(load_json(p, field), field, p.parent_path());
  }
  require_object(doc, field);
  if (!doc.contains("type") || !doc.at("type").is_string()) throw ConfigError(join(field, "type"), "must be a string");
  const std::string type = doc.at("type").get<std::string>();

  if (type == "exp_poly") {
    check_keys(doc, field, {"type", "terms"});
    const std::string tf = join(field, "terms");
    if (!doc.contains("terms") || !doc.at("terms").is_array()) throw ConfigError(tf, "must be an array");
    std::vector<ComplexTerm> terms;
    const Json& arr = doc.at("terms");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string f = index(tf, i);
      const Json& t = arr[i];
      require_object(t, f);
      check_keys(t, f, {"poly_re", "poly_im", "z_re", "z_im"});
      const auto re = number_array(t, "poly_re", f);
      const auto im = number_array(t, "poly_im", f);
      if (re.empty() && im.empty()) throw ConfigError(f, "polynomial has no coefficients");
      std::vector<std::complex<double>> c(std::max(re.size(), im.size()));
      for (std::size_t k = 0; k < c.size(); ++k)
        c[k] = {k < re.size() ? re[k] : 0.0, k < im.size() ? im[k] : 0.0};
      const double zr = number_at(t, "z_re", f);
      const double zi = number_at(t, "z_im", f, 0.0);
      terms.push_back(ComplexTerm{ComplexPoly(std::move(c)), {zr, zi}});
    }
    return with_field(field, [&] { return Kernel{ExpPolyKernel::from_terms(terms)}; });
  }
  if (type == "sampled_builtin") {
    check_keys(doc, field, {"type", "name", "C", "delta"});
    if (!doc.contains("name") || !doc.at("name").is_string()) throw ConfigError(join(field, "name"), "must be a string");
    const std::string name = doc.at("name").get<std::string>();
    const auto names = SampledKernel::builtin_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw ConfigError(join(field, "name"), "unknown builtin kernel '" + name + "'");
    const double C = positive_at(doc, "C", field);
    const double delta = positive_at(doc, "delta", field);
    return with_field(field, [&] { return Kernel{SampledKernel::builtin(name, {C, delta})}; });
  }
  throw ConfigError(join(field, "type"), "unknown kernel type '" + type + "'");
}

Json kernel_to_json(const ExpPolyKernel& kernel) {
  Json terms = Json::array();
  auto add = [&](const ComplexPoly& p, std::complex<double> z) {
    Json re = Json::array(), im = Json::array();
    for (const auto& c : p.coeffs()) {
      re.push_back(c.real());
      im.push_back(c.imag());
    }
    terms.push_back(Json{{"poly_re", re}, {"poly_im", im}, {"z_re", z.real()}, {"z_im", z.imag()}});
  };
  if (kernel.asymptotic_value() != 0.0) add(ComplexPoly{{kernel.asymptotic_value(), 0.0}}, {0.0, 0.0});
  for (const auto& t : kernel.conjugate_closed_terms(0)) add(t.poly, t.z);
  return Json{{"type", "exp_poly"}, {"terms", terms}};
}

MediumSpec parse_medium(const Json& doc, const std::string& field, const fs::path& base) {
  MediumSpec m;
  if (doc.is_null()) return m;
  require_object(doc, field);
  check_keys(doc, field, {"eps", "mu", "nuE", "nuH"});
  m.eps = positive_at(doc, "eps", field, 1.0);
  m.mu = positive_at(doc, "mu", field, 1.0);
  m.nuE = parse_kernel(doc.contains("nuE") ? doc.at("nuE") : Json(), join(field, "nuE"), base);
  m.nuH = parse_kernel(doc.contains("nuH") ? doc.at("nuH") : Json(), join(field, "nuH"), base);
  return m;
}

namespace {

const Json& member(const Json& doc, const char* key) {
  static const Json null_json;
  return doc.contains(key) ? doc.at(key) : null_json;
}

}  // namespace

SimulateConfig parse_simulate(const Json& doc, const fs::path& base) {
  require_object(doc, "");
  check_keys(doc, "", {"medium", "modes", "cavity", "dt", "T", "output_stride", "threads", "weight"});
  SimulateConfig c;
  c.medium = parse_medium(member(doc, "medium"), "medium", base);

  const bool has_modes = doc.contains("modes"), has_cavity = doc.contains("cavity");
  if (has_modes == has_cavity) throw ConfigError("modes", "give exactly one of 'modes' or 'cavity'");
  if (has_modes) {
    const Json& arr = doc.at("modes");
    if (!arr.is_array()) throw ConfigError("modes", "must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string f = index("modes", i);
      require_object(arr[i], f);
      check_keys(arr[i], f, {"k", "amplitude"});
      const double k = number_at(arr[i], "k", f);
      if (k < 0.0) throw ConfigError(join(f, "k"), "must be nonnegative");
      c.modes.push_back({k, number_at(arr[i], "amplitude", f)});
    }
  } else {
    const Json& cav = doc.at("cavity");
    require_object(cav, "cavity");
    check_keys(cav, "cavity", {"length", "n_max", "amplitude_power"});
    const double length = positive_at(cav, "length", "cavity");
    const long n = integer_at(cav, "n_max", "cavity");
    if (n < 0 || n > 1'000'000) throw ConfigError("cavity.n_max", "must be between 0 and 1000000");
    const double power = number_at(cav, "amplitude_power", "cavity", 1.5);
    c.modes = cavity_modes(c.medium, length, static_cast<int>(n), power);
  }

  c.run.dt = positive_at(doc, "dt", "");
  c.run.T = positive_at(doc, "T", "");
  if (!(c.run.T > c.run.dt)) throw ConfigError("T", "must exceed dt");
  const double ratio = c.run.T / c.run.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) throw ConfigError("T", "must be a whole number of steps dt");
  if (ratio > 1e8) throw ConfigError("T", "too many steps (T / dt > 1e8)");
  const long stride = integer_at(doc, "output_stride", "", 1);
  if (stride < 1) throw ConfigError("output_stride", "must be at least 1");
  c.run.output_stride = static_cast<std::size_t>(stride);
  const long threads = integer_at(doc, "threads", "", 1);
  if (threads < 1 || threads > 1024) throw ConfigError("threads", "must be between 1 and 1024");
  c.run.threads = static_cast<unsigned>(threads);
  if (doc.contains("weight")) {
    const Json& w = doc.at("weight");
    require_object(w, "weight");
    check_keys(w, "weight", {"C", "delta"});
    c.run.weight = DecayBound{positive_at(w, "C", "weight"), positive_at(w, "delta", "weight")};
  }
  return c;
}

SpectrumConfig parse_spectrum(const Json& doc, const fs::path& base) {
  require_object(doc, "");
  check_keys(doc, "", {"medium", "k", "k_range"});
  SpectrumConfig c;
  c.medium = parse_medium(member(doc, "medium"), "medium", base);
  const bool has_list = doc.contains("k"), has_range = doc.contains("k_range");
  if (has_list == has_range) throw ConfigError("k", "give exactly one of 'k' or 'k_range'");
  if (has_list) {
    if (!doc.at("k").is_array()) throw ConfigError("k", "must be an array of numbers");
    c.ks = number_array(doc, "k", "");
  } else {
    const Json& r = doc.at("k_range");
    require_object(r, "k_range");
    check_keys(r, "k_range", {"start", "stop", "count", "spacing"});
    const double a = number_at(r, "start", "k_range");
    const double b = number_at(r, "stop", "k_range");
    const long n = integer_at(r, "count", "k_range");
    if (n < 1 || n > 1'000'000) throw ConfigError("k_range.count", "must be between 1 and 1000000");
    if (b < a) throw ConfigError("k_range.stop", "must not be below start");
    std::string spacing = "linear";
    if (r.contains("spacing")) {
      if (!r.at("spacing").is_string()) throw ConfigError("k_range.spacing", "must be \"linear\" or \"log\"");
      spacing = r.at("spacing").get<std::string>();
    }
    if (spacing != "linear" && spacing != "log") throw ConfigError("k_range.spacing", "must be \"linear\" or \"log\"");
    if (spacing == "log" && !(a > 0.0)) throw ConfigError("k_range.start", "must be positive for log spacing");
    for (long i = 0; i < n; ++i) {
      const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
      c.ks.push_back(spacing == "linear" ? a + (b - a) * f : a * std::pow(b / a, f));
    }
  }
  for (std::size_t i = 0; i < c.ks.size(); ++i)
    if (c.ks[i] < 0.0) throw ConfigError(index("k", i), "must be nonnegative");
  return c;
}

AnalyzeConfig parse_analyze(const Json& doc, const fs::path& base) {
  require_object(doc, "");
  check_keys(doc, "", {"medium", "scan"});
  AnalyzeConfig c;
  c.medium = parse_medium(member(doc, "medium"), "medium", base);
  if (doc.contains("scan")) {
    const Json& s = doc.at("scan");
    require_object(s, "scan");
    check_keys(s, "scan", {"points", "omega_max", "quadrature_points", "quadrature_omega_max"});
    auto count = [&](const char* key, std::size_t fallback) {
      const long v = integer_at(s, key, "scan", static_cast<long>(fallback));
      if (v < 2 || v > 100'000'000) throw ConfigError(join("scan", key), "must be between 2 and 1e8");
      return static_cast<std::size_t>(v);
    };
    c.scan.points = count("points", c.scan.points);
    c.scan.omega_max = positive_at(s, "omega_max", "scan", c.scan.omega_max);
    c.scan.quadrature_points = count("quadrature_points", c.scan.quadrature_points);
    c.scan.quadrature_omega_max = positive_at(s, "quadrature_omega_max", "scan", c.scan.quadrature_omega_max);
  }
  return c;
}

FitConfig parse_fit(const Json& doc, const fs::path& base) {
  require_object(doc, "");
  check_keys(doc, "", {"trace", "window"});
  FitConfig c;
  if (!doc.contains("trace") || !doc.at("trace").is_string()) throw ConfigError("trace", "must be a path string");
  c.trace = (base / doc.at("trace").get<std::string>()).string();
  if (doc.contains("window")) {
    const Json& w = doc.at("window");
    if (!w.is_array() || w.size() != 2) throw ConfigError("window", "must be [start, end]");
    c.window = FitWindow{number(w[0], "window[0]"), number(w[1], "window[1]")};
    if (!(c.window->t_end > c.window->t_start)) throw ConfigError("window", "end must exceed start");
  }
  return c;
}

FitWindow parse_window(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("window", "expected 'start,end'");
  auto parse = [](const std::string& s, const char* f) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno != 0 || !std::isfinite(v))
      throw ConfigError(f, "'" + s + "' is not a number");
    return v;
  };
  FitWindow w{parse(text.substr(0, comma), "window.start"), parse(text.substr(comma + 1), "window.end")};
  if (!(w.t_end > w.t_start)) throw ConfigError("window", "end must exceed start");
  return w;
}

namespace {

void append_number(std::string& s, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  s += buf;
}

}  // namespace

std::string format_trace(const EnergyTrace& trace) {
  std::string s = "t,energy,history_norm\n";
  s.reserve(64 * trace.times.size() + s.size());
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    append_number(s, trace.times[i]);
    s += ',';
    append_number(s, trace.energy[i]);
    s += ',';
    append_number(s, i < trace.history_norm.size() ? trace.history_norm[i] : 0.0);
    s += '\n';
  }
  return s;
}

void write_trace(std::ostream& os, const EnergyTrace& trace) { os << format_trace(trace); }

EnergyTrace read_trace(std::istream& is) {
  EnergyTrace tr;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw ConfigError("trace", "empty trace");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool has_history = true;
  if (line == "t,energy") has_history = false;
  else if (line != "t,energy,history_norm") throw ConfigError("trace", "line 1: expected header 't,energy,history_norm'");

  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> cols;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      const std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size())
        throw ConfigError("trace", "line " + std::to_string(lineno) + ": '" + cell + "' is not a number");
      cols.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cols.size() != (has_history ? 3u : 2u))
      throw ConfigError("trace", "line " + std::to_string(lineno) + ": wrong number of columns");
    if (!tr.times.empty() && !(cols[0] > tr.times.back()))
      throw ConfigError("trace", "line " + std::to_string(lineno) + ": times must increase");
    tr.times.push_back(cols[0]);
    tr.energy.push_back(cols[1]);
    tr.history_norm.push_back(has_history ? cols[2] : 0.0);
  }
  return tr;
}

EnergyTrace read_trace(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("trace", "cannot open '" + path.string() + "'");
  return read_trace(in);
}

std::string format_spectrum(const std::vector<double>& ks, const std::vector<Spectrum>& spectra) {
  std::string s = "k,abscissa,n_eigs\n";
  for (std::size_t i = 0; i < ks.size(); ++i) {
    append_number(s, ks[i]);
    s += ',';
    append_number(s, spectra[i].abscissa);
    s += ',';
    s += std::to_string(spectra[i].eigenvalues.size());
    s += '\n';
  }
  return s;
}

Json report_to_json(const PassivityReport& r, const ClassKCertificate& certE, const ClassKCertificate& certH) {
  Json j;
  j["passive"] = r.passive;
  j["strictly_passive"] = r.strictly_passive;
  j["m"] = r.m ? Json(*r.m) : Json(nullptr);
  j["sigma_E"] = r.sigma_E;
  j["sigma_H"] = r.sigma_H;
  j["omega0"] = r.omega0;
  j["witnesses"] = r.witnesses;
  j["method"] = r.exact ? "exact" : "numerical";
  j["certificates"] = Json{{"E", Json{{"C", certE.C}, {"delta", certE.delta}}},
                           {"H", Json{{"C", certH.C}, {"delta", certH.delta}}}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Json report_to_json(const DecayReport& r) {
  auto line = [](const LineFit& f) {
    return Json{{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
  };
  Json j;
  j["kind"] = to_string(r.kind);
  if (r.kind == DecayKind::exponential) j["rate"] = r.rate;
  if (r.kind == DecayKind::polynomial) j["slope"] = r.slope;
  j["window"] = Json::array({r.window.t_start, r.window.t_end});
  j["r_squared"] = r.r_squared;
  j["residual"] = r.residual;
  j["samples"] = r.samples;
  j["exponential_fit"] = line(r.exponential_fit);
  j["polynomial_fit"] = line(r.polynomial_fit);
  if (!r.reason.empty()) j["reason"] = r.reason;
  return j;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("out", "cannot write '" + path.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw ConfigError("out", "cannot write '" + path.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ConfigError("out", "cannot write '" + path.string() + "'");
  }
}

}  // namespace dispersia
