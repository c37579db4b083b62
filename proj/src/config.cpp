#include "mflk/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mflk/io.hpp"

namespace mflk {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::string clean;
  for (char c : s)
    if (c != '_') clean += c;
  std::size_t pos = 0;
  try {
    out = std::stod(clean, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == clean.size();
}

std::string unquote(const std::string& s, int line_no) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected a quoted string, got " + s);
}

ConfigValue parse_value(const std::string& raw, int line_no) {
  const std::string v = trim(raw);
  if (v.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": missing value");
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"') return unquote(v, line_no);
  if (v.front() == '[') {
    if (v.back() != ']') throw std::invalid_argument("config line " + std::to_string(line_no) + ": unterminated array");
    std::vector<std::string> items;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) items.push_back(item);
    }
    if (!items.empty() && items.front().front() == '"') {
      std::vector<std::string> out;
      for (const auto& it : items) out.push_back(unquote(it, line_no));
      return out;
    }
    std::vector<double> out;
    for (const auto& it : items) {
      double d = 0.0;
      if (!parse_number(it, d))
        throw std::invalid_argument("config line " + std::to_string(line_no) + ": bad array entry " + it);
      out.push_back(d);
    }
    return out;
  }
  double d = 0.0;
  if (parse_number(v, d)) return d;
  throw std::invalid_argument("config line " + std::to_string(line_no) + ": cannot parse value " + v);
}

}  // namespace

ConfigTable parse_config_text(const std::string& text) {
  ConfigTable table;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::string s = trim(strip_comment(line));
    if (s.empty() || s.front() == '[') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    if (table.count(key)) throw std::invalid_argument("config line " + std::to_string(line_no) + ": duplicate key " + key);
    table[key] = parse_value(s.substr(eq + 1), line_no);
  }
  return table;
}

ConfigTable load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

template <class T>
const T& get_as(const ConfigValue& v, const std::string& key, const char* what) {
  if (const T* p = std::get_if<T>(&v)) return *p;
  throw std::invalid_argument("config key " + key + ": expected " + what);
}

int to_int(const ConfigValue& v, const std::string& key) {
  const double d = get_as<double>(v, key, "an integer");
  if (d != std::floor(d) || std::abs(d) > 1e9) throw std::invalid_argument("config key " + key + ": expected an integer");
  return static_cast<int>(d);
}

std::vector<int> to_int_list(const ConfigValue& v, const std::string& key) {
  std::vector<int> out;
  for (double d : get_as<std::vector<double>>(v, key, "an array of integers")) {
    if (d != std::floor(d)) throw std::invalid_argument("config key " + key + ": expected integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

std::string fmt(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

template <class T, class F>
std::string fmt_list(const std::vector<T>& v, F f) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + f(v[i]);
  return s + "]";
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("config: " + msg);
}

}  // namespace

ExperimentConfig config_from_table(const ConfigTable& table) {
  ExperimentConfig c;
  for (const auto& [key, v] : table) {
    if (key == "experiment") c.experiment = get_as<std::string>(v, key, "a string");
    else if (key == "seed") {
      const double d = get_as<double>(v, key, "an integer");
      require(d >= 0 && d == std::floor(d) && d < 9.007199254740992e15, "seed must be a nonnegative integer");
      c.seed = static_cast<std::uint64_t>(d);
    }
    else if (key == "dim") c.dim = to_int(v, key);
    else if (key == "atoms") c.atoms = to_int(v, key);
    else if (key == "base_family") c.base_family = io::parse_base_family(get_as<std::string>(v, key, "a string"));
    else if (key == "lengthscale") c.lengthscale = get_as<double>(v, key, "a number");
    else if (key == "outer") c.outer = io::parse_outer_kind(get_as<std::string>(v, key, "a string"));
    else if (key == "sigma") c.sigma = get_as<double>(v, key, "a number");
    else if (key == "estimator") c.estimator = io::parse_estimator(get_as<std::string>(v, key, "a string"));
    else if (key == "loss") c.loss = io::parse_loss_kind(get_as<std::string>(v, key, "a string"));
    else if (key == "svm_losses") {
      c.svm_losses.clear();
      for (const auto& s : get_as<std::vector<std::string>>(v, key, "an array of strings"))
        c.svm_losses.push_back(io::parse_loss_kind(s));
    }
    else if (key == "loss_epsilon") c.loss_epsilon = get_as<double>(v, key, "a number");
    else if (key == "lambda") c.lambda = get_as<double>(v, key, "a number");
    else if (key == "functional") c.functional = io::parse_functional_kind(get_as<std::string>(v, key, "a string"));
    else if (key == "functional_estimator") c.functional_estimator = io::parse_estimator(get_as<std::string>(v, key, "a string"));
    else if (key == "target_scale") c.target_scale = get_as<double>(v, key, "a number");
    else if (key == "noise") c.noise = get_as<double>(v, key, "a number");
    else if (key == "y_lo") c.y_lo = get_as<double>(v, key, "a number");
    else if (key == "y_hi") c.y_hi = get_as<double>(v, key, "a number");
    else if (key == "m_schedule") c.m_schedule = to_int_list(v, key);
    else if (key == "n_train") c.n_train = to_int(v, key);
    else if (key == "replicates") c.replicates = to_int(v, key);
    else if (key == "gap_samples") c.gap_samples = to_int(v, key);
    else if (key == "n_test") c.n_test = to_int(v, key);
    else if (key == "n_mc") c.n_mc = to_int(v, key);
    else if (key == "n_proxy") c.n_proxy = to_int(v, key);
    else if (key == "n_minimal") c.n_minimal = to_int(v, key);
    else if (key == "centers") c.centers = to_int(v, key);
    else if (key == "n_reference") c.n_reference = to_int(v, key);
    else if (key == "m0") c.m0 = to_int(v, key);
    else if (key == "lambda_grid") c.lambda_grid = get_as<std::vector<double>>(v, key, "an array of numbers");
    else if (key == "a2_tolerance") c.a2_tolerance = get_as<double>(v, key, "a number");
    else if (key == "minimal_risk_tolerance") c.minimal_risk_tolerance = get_as<double>(v, key, "a number");
    else if (key == "n_grid") c.n_grid = to_int_list(v, key);
    else if (key == "approx_lambda") c.approx_lambda = get_as<double>(v, key, "a number");
    else if (key == "out") c.out = get_as<std::string>(v, key, "a string");
    else if (key == "threads") c.threads = to_int(v, key);
    else if (key == "timing") c.timing = get_as<bool>(v, key, "a boolean");
    else throw std::invalid_argument("config: unknown key " + key);
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  require(m_schedule.size() >= 2, "m_schedule needs at least two sizes");
  for (std::size_t i = 0; i < m_schedule.size(); ++i) {
    require(m_schedule[i] >= 2, "every M must be >= 2");
    if (i) require(m_schedule[i] > m_schedule[i - 1], "m_schedule must be strictly increasing");
  }
  require(std::find(m_schedule.begin(), m_schedule.end(), m0) != m_schedule.end(), "m0 must be in m_schedule");
  require(!n_grid.empty(), "n_grid must not be empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    require(n_grid[i] >= 1, "n_grid entries must be >= 1");
    if (i) require(n_grid[i] > n_grid[i - 1], "n_grid must be strictly increasing");
  }
  require(!lambda_grid.empty(), "lambda_grid must not be empty");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    require(lambda_grid[i] > 0.0, "lambda_grid entries must be positive");
    if (i) require(lambda_grid[i] > lambda_grid[i - 1], "lambda_grid must be strictly increasing");
  }
  require(dim >= 1 && dim <= 3, "dim must be 1, 2 or 3");
  require(atoms >= 1, "atoms must be >= 1");
  require(lengthscale > 0.0 && sigma > 0.0, "lengthscale and sigma must be positive");
  require(lambda > 0.0 && approx_lambda > 0.0, "lambda must be positive");
  require(loss_epsilon >= 0.0 && noise >= 0.0, "loss_epsilon and noise must be nonnegative");
  require(y_lo <= y_hi, "y_lo must not exceed y_hi");
  require(!svm_losses.empty(), "svm_losses must not be empty");
  require(n_train >= 1 && n_proxy >= 2 && n_minimal >= 1, "sample sizes must be positive");
  require(replicates >= 1 && gap_samples >= 1 && n_test >= 1 && n_mc >= 2, "sample counts must be positive");
  require(centers >= 1 && n_reference >= 1, "centers and n_reference must be >= 1");
  require(a2_tolerance > 0.0 && minimal_risk_tolerance > 0.0, "tolerances must be positive");
  require(threads >= 1, "threads must be >= 1");
}

TargetFunctional ExperimentConfig::target_functional() const {
  TargetFunctional F;
  F.kind = functional;
  F.estimator = functional_estimator;
  F.interaction = base_kernel();
  F.scale = target_scale;
  return F;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  auto q = [](const std::string& s) { return "\"" + s + "\""; };
  auto ints = [](int i) { return std::to_string(i); };
  return {
      {"experiment", q(experiment)},
      {"seed", std::to_string(seed)},
      {"dim", ints(dim)},
      {"atoms", ints(atoms)},
      {"base_family", q(to_string(base_family))},
      {"lengthscale", fmt(lengthscale)},
      {"outer", q(to_string(outer))},
      {"sigma", fmt(sigma)},
      {"estimator", q(to_string(estimator))},
      {"loss", q(to_string(loss))},
      {"svm_losses", fmt_list(svm_losses, [&](LossKind k) { return q(to_string(k)); })},
      {"loss_epsilon", fmt(loss_epsilon)},
      {"lambda", fmt(lambda)},
      {"functional", q(to_string(functional))},
      {"functional_estimator", q(to_string(functional_estimator))},
      {"target_scale", fmt(target_scale)},
      {"noise", fmt(noise)},
      {"y_lo", fmt(y_lo)},
      {"y_hi", fmt(y_hi)},
      {"m_schedule", fmt_list(m_schedule, ints)},
      {"n_train", ints(n_train)},
      {"replicates", ints(replicates)},
      {"gap_samples", ints(gap_samples)},
      {"n_test", ints(n_test)},
      {"n_mc", ints(n_mc)},
      {"n_proxy", ints(n_proxy)},
      {"n_minimal", ints(n_minimal)},
      {"centers", ints(centers)},
      {"n_reference", ints(n_reference)},
      {"m0", ints(m0)},
      {"lambda_grid", fmt_list(lambda_grid, fmt)},
      {"a2_tolerance", fmt(a2_tolerance)},
      {"minimal_risk_tolerance", fmt(minimal_risk_tolerance)},
      {"n_grid", fmt_list(n_grid, ints)},
      {"approx_lambda", fmt(approx_lambda)},
      {"out", q(out)},
      {"threads", ints(threads)},
      {"timing", timing ? "true" : "false"},
  };
}

}  // namespace mflk
