#include "ptctk/registry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ptctk {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

template <typename Entry>
Entry lookup(const std::map<std::string, Entry>& table, const std::string& kind,
             const std::string& name) {
  auto it = table.find(name);
  if (it == table.end()) {
    std::string known;
    for (const auto& [key, _] : table) known += (known.empty() ? "" : ", ") + key;
    throw std::invalid_argument("unknown " + kind + " '" + name +
                                "' (known: " + known + ")");
  }
  return it->second;
}

template <typename Entry>
std::vector<std::string> names_of(const std::map<std::string, Entry>& table) {
  std::vector<std::string> out;
  for (const auto& [key, _] : table) out.push_back(key);
  return out;
}

void register_builtins(Registry& r) {
  const std::vector<ParamSchema> terms_schema{
      {"terms", "list of [a, b] pairs"}};
  r.register_map("log_kappa",
                 {"kappa(t) = -sum a_i log_{b_i}(1 - t/tau), a_i > 0, b_i > 1",
                  terms_schema, kappa_log});
  r.register_map("exp_mu",
                 {"mu(t) = (1/N) sum tau (1 - a_i^(-b_i t)), a_i > 1, b_i > 0",
                  terms_schema, mu_exp});

  r.register_controller(
      "example4_pi0",
      {"pi0(xi) = -psi xi / (|xi| - phi |xi(0)|)^2 (first-order systems)",
       {{"psi", "gain, > 0"}, {"phi", "barrier ratio, > 1"}},
       [](const Params& p, const BuildContext& ctx) {
         if (ctx.n != 1) {
           throw std::invalid_argument("example4_pi0 requires order 1");
         }
         return example4_pi0(param_scalar(p, "psi"), param_scalar(p, "phi"),
                             std::abs(ctx.xi0(0)));
       }});
  r.register_controller(
      "linear_pd",
      {"pi0(xi) = -k_1 xi_1 - ... - k_n xi_n",
       {{"k", "n feedback gains (optional)"},
        {"pole", "place all closed-loop poles at -pole when k is absent"}},
       [](const Params& p, const BuildContext& ctx) {
         std::vector<double> k;
         if (auto it = p.find("k"); it != p.end()) {
           k = it->second;
         } else {
           const double pole = param_scalar(p, "pole", 3.0);
           for (int j = 0; j < ctx.n; ++j) {
             k.push_back(binomial(ctx.n, j) * std::pow(pole, ctx.n - j));
           }
         }
         if (static_cast<int>(k.size()) != ctx.n) {
           throw std::invalid_argument("linear_pd: need exactly n gains");
         }
         return linear_pd(std::move(k));
       }});
  r.register_controller("zero", {"pi0 = 0", {}, [](const Params&, const BuildContext&) {
                                   return zero_controller();
                                 }});

  r.register_disturbance(
      "zero", {"f = 0", {}, [](const Params&, const BuildContext&) -> Disturbance {
                 return [](const Vector&, double, double) { return 0.0; };
               },
               [](const Params& p, std::mt19937_64&) { return p; }});
  r.register_disturbance(
      "sinusoid",
      {"f = amplitude sin(omega t + phase)",
       {{"amplitude", "bound on |f|"}, {"omega", "rad/s"}, {"phase", "rad"}},
       [](const Params& p, const BuildContext&) -> Disturbance {
         const double a = param_scalar(p, "amplitude", 1.0);
         const double w = param_scalar(p, "omega", 1.0);
         const double ph = param_scalar(p, "phase", 0.0);
         return [a, w, ph](const Vector&, double, double t) {
           return a * std::sin(w * t + ph);
         };
       },
       [](const Params& p, std::mt19937_64& rng) {
         const double a = param_scalar(p, "amplitude", 1.0);
         const double w = param_scalar(p, "omega", 1.0);
         std::uniform_real_distribution<double> unit(0.0, 1.0);
         Params out = p;
         out["amplitude"] = {a * unit(rng)};
         out["omega"] = {w * (0.5 + 1.5 * unit(rng))};
         out["phase"] = {2.0 * std::numbers::pi * unit(rng)};
         return out;
       }});
  r.register_disturbance(
      "example4",
      {"f = offset - t^3 exp(-t) sin(x_1 / (u + eps)) + b u",
       {{"offset", "constant part of a(x, u, t)"},
        {"b", "unknown input-gain perturbation, |b| < |g|"},
        {"eps", "regularizer in the sine argument"},
        {"b_bound", "sweeps draw b from (-b_bound, b_bound)"}},
       [](const Params& p, const BuildContext&) -> Disturbance {
         const double offset = param_scalar(p, "offset", 0.1);
         const double b = param_scalar(p, "b", -0.5);
         const double eps = param_scalar(p, "eps", 0.001);
         return [offset, b, eps](const Vector& x, double u, double t) {
           const double a =
               offset - t * t * t * std::exp(-t) * std::sin(x(0) / (u + eps));
           return a + b * u;
         };
       },
       [](const Params& p, std::mt19937_64& rng) {
         const double bound = param_scalar(p, "b_bound", 0.9);
         const double offset = param_scalar(p, "offset", 0.1);
         std::uniform_real_distribution<double> unit(-1.0, 1.0);
         Params out = p;
         out["b"] = {bound * unit(rng)};
         out["offset"] = {std::abs(offset) * unit(rng)};
         return out;
       }});

  r.register_gain("constant",
                  {"g = value", {{"value", "nonzero gain"}},
                   [](const Params& p, const BuildContext&) -> InputGain {
                     const double v = param_scalar(p, "value", 1.0);
                     if (v == 0.0) {
                       throw std::invalid_argument("constant gain must be nonzero");
                     }
                     return [v](const Vector&, double) { return v; };
                   }});
  r.register_gain(
      "sinusoid",
      {"g = value (1 + amplitude sin(omega t)), |amplitude| < 1",
       {{"value", "nominal gain"}, {"amplitude", "< 1"}, {"omega", "rad/s"}},
       [](const Params& p, const BuildContext&) -> InputGain {
         const double v = param_scalar(p, "value", 1.0);
         const double a = param_scalar(p, "amplitude", 0.5);
         const double w = param_scalar(p, "omega", 1.0);
         if (v == 0.0 || !(std::abs(a) < 1.0)) {
           throw std::invalid_argument(
               "sinusoid gain needs value != 0 and |amplitude| < 1");
         }
         return [v, a, w](const Vector&, double t) {
           return v * (1.0 + a * std::sin(w * t));
         };
       }});
}

template <typename Entry>
nlohmann::json entries_json(const std::map<std::string, Entry>& table) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, entry] : table) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& s : entry.schema) params[s.name] = s.description;
    out[name] = {{"description", entry.description}, {"params", params}};
  }
  return out;
}

template <typename Entry>
void entries_text(std::ostringstream& os, const char* title,
                  const std::map<std::string, Entry>& table) {
  os << title << ":\n";
  for (const auto& [name, entry] : table) {
    os << "  " << name << "  " << entry.description << "\n";
    for (const auto& s : entry.schema) {
      os << "      " << s.name << ": " << s.description << "\n";
    }
  }
}

}  // namespace

double param_scalar(const Params& params, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end() || it->second.empty()) {
    throw std::invalid_argument("missing parameter '" + key + "'");
  }
  if (it->second.size() != 1) {
    throw std::invalid_argument("parameter '" + key + "' must be a scalar");
  }
  return it->second.front();
}

double param_scalar(const Params& params, const std::string& key,
                    double fallback) {
  return params.count(key) ? param_scalar(params, key) : fallback;
}

Registry::Registry() { register_builtins(*this); }

Registry& Registry::instance() {
  static Registry registry;
  return registry;
}

void Registry::register_map(const std::string& name, MapEntry entry) {
  std::lock_guard lock(mutex_);
  maps_[name] = std::move(entry);
}

void Registry::register_controller(const std::string& name,
                                   ControllerEntry entry) {
  std::lock_guard lock(mutex_);
  controllers_[name] = std::move(entry);
}

void Registry::register_disturbance(const std::string& name,
                                    DisturbanceEntry entry) {
  std::lock_guard lock(mutex_);
  disturbances_[name] = std::move(entry);
}

void Registry::register_gain(const std::string& name, GainEntry entry) {
  std::lock_guard lock(mutex_);
  gains_[name] = std::move(entry);
}

MapEntry Registry::map(const std::string& name) const {
  std::lock_guard lock(mutex_);
  return lookup(maps_, "map family", name);
}

ControllerEntry Registry::controller(const std::string& name) const {
  std::lock_guard lock(mutex_);
  return lookup(controllers_, "controller", name);
}

DisturbanceEntry Registry::disturbance(const std::string& name) const {
  std::lock_guard lock(mutex_);
  return lookup(disturbances_, "disturbance", name);
}

GainEntry Registry::gain(const std::string& name) const {
  std::lock_guard lock(mutex_);
  return lookup(gains_, "gain", name);
}

std::vector<std::string> Registry::map_names() const {
  std::lock_guard lock(mutex_);
  return names_of(maps_);
}

std::vector<std::string> Registry::controller_names() const {
  std::lock_guard lock(mutex_);
  return names_of(controllers_);
}

std::vector<std::string> Registry::disturbance_names() const {
  std::lock_guard lock(mutex_);
  return names_of(disturbances_);
}

std::vector<std::string> Registry::gain_names() const {
  std::lock_guard lock(mutex_);
  return names_of(gains_);
}

std::string Registry::list_text() const {
  std::lock_guard lock(mutex_);
  std::ostringstream os;
  entries_text(os, "map families", maps_);
  entries_text(os, "controllers", controllers_);
  entries_text(os, "disturbances", disturbances_);
  entries_text(os, "gains", gains_);
  return os.str();
}

std::string Registry::list_json() const {
  std::lock_guard lock(mutex_);
  nlohmann::json doc = {{"maps", entries_json(maps_)},
                        {"controllers", entries_json(controllers_)},
                        {"disturbances", entries_json(disturbances_)},
                        {"gains", entries_json(gains_)}};
  return doc.dump(2);
}

}  // namespace ptctk
