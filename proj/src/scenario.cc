#include "secest/scenario.h"

#include <set>

namespace secest {
namespace {

// Typed access to a JSON object with field-path error messages. Unknown keys
// are rejected so typos do not silently fall back to defaults.
class Fields {
 public:
  Fields(const Json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError(Where() + ": expected an object");
    for (const auto& item : j_.items()) {
      if (!allowed.count(item.key())) throw ParseError(Where(item.key()) + ": unknown field");
    }
  }

  bool Has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const Json& At(const std::string& key) const {
    if (!Has(key)) throw ParseError(Where(key) + ": required field missing");
    return j_.at(key);
  }
  std::string Where(const std::string& key = "") const {
    const std::string base = path_.empty() ? "/" : path_;
    return key.empty() ? base : (path_ + "/" + key);
  }

  double Number(const std::string& key) const {
    const Json& v = At(key);
    if (!v.is_number()) throw ParseError(Where(key) + ": expected a number");
    return v.get<double>();
  }
  double Number(const std::string& key, double fallback) const { return Has(key) ? Number(key) : fallback; }

  long long Integer(const std::string& key) const {
    const Json& v = At(key);
    if (!v.is_number_integer()) throw ParseError(Where(key) + ": expected an integer");
    return v.get<long long>();
  }
  long long Integer(const std::string& key, long long fallback) const {
    return Has(key) ? Integer(key) : fallback;
  }

  std::string String(const std::string& key) const {
    const Json& v = At(key);
    if (!v.is_string()) throw ParseError(Where(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::string String(const std::string& key, const std::string& fallback) const {
    return Has(key) ? String(key) : fallback;
  }

  std::vector<int> IntList(const std::string& key) const {
    const Json& v = At(key);
    if (!v.is_array()) throw ParseError(Where(key) + ": expected an array of integers");
    std::vector<int> out;
    for (size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) {
        throw ParseError(Where(key) + "/" + std::to_string(i) + ": expected an integer");
      }
      out.push_back(v[i].get<int>());
    }
    return out;
  }

 private:
  const Json& j_;
  std::string path_;
};

int PositiveInt(const Fields& f, const std::string& key, long long fallback) {
  const long long v = f.Integer(key, fallback);
  if (v < 1 || v > (1LL << 30)) throw ParseError(f.Where(key) + ": must be a positive integer");
  return static_cast<int>(v);
}

std::uint64_t Seed(const Fields& f, const std::string& key, std::uint64_t fallback) {
  if (!f.Has(key)) return fallback;
  const Json& v = f.At(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
    throw ParseError(f.Where(key) + ": expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

void ParseModel(const Json& j, Scenario& sc) {
  Fields f(j, "/model", {"random", "A", "C", "B", "sigma_w2", "sigma_v2"});
  sc.sigma_w2 = f.Number("sigma_w2", 1.0);
  sc.sigma_v2 = f.Number("sigma_v2", 1.0);
  if (sc.sigma_w2 < 0.0) throw ParseError(f.Where("sigma_w2") + ": must be nonnegative");
  if (sc.sigma_v2 < 0.0) throw ParseError(f.Where("sigma_v2") + ": must be nonnegative");
  if (f.Has("random")) {
    if (f.Has("A") || f.Has("C")) throw ParseError("/model: give either random or A/C, not both");
    Fields r(f.At("random"), "/model/random", {"n", "p", "spectral_radius", "seed"});
    RandomModelSpec spec;
    spec.n = PositiveInt(r, "n", 0);
    spec.p = r.Has("p") ? PositiveInt(r, "p", 0) : 0;
    spec.spectral_radius = r.Number("spectral_radius", 0.9);
    if (!(spec.spectral_radius > 0.0 && spec.spectral_radius < 1.0)) {
      throw ParseError(r.Where("spectral_radius") + ": must lie in (0, 1)");
    }
    spec.seed = Seed(r, "seed", 0);
    sc.random_model = spec;
    return;
  }
  SystemModel m;
  m.A = MatrixFromJson(f.At("A"), f.Where("A"));
  m.C = MatrixFromJson(f.At("C"), f.Where("C"));
  if (f.Has("B")) m.B = MatrixFromJson(f.At("B"), f.Where("B"));
  m.sigma_w2 = sc.sigma_w2;
  m.sigma_v2 = sc.sigma_v2;
  try {
    m.Validate();
  } catch (const Error& e) {
    throw ParseError(std::string("/model: ") + e.what());
  }
  sc.explicit_model = std::move(m);
}

void ParseAttack(const Json& j, Scenario& sc) {
  Fields f(j, "/attack", {"strategy", "sensors", "gain", "amplitude", "bias"});
  AttackScenario& a = sc.attack;
  try {
    a.kind = AttackKindFromString(f.String("strategy", "none"));
  } catch (const ConfigError& e) {
    throw ParseError(f.Where("strategy") + ": " + e.what());
  }
  if (f.Has("sensors")) {
    const Json& s = f.At("sensors");
    if (s.is_string()) {
      if (s.get<std::string>() != "random") {
        throw ParseError(f.Where("sensors") + ": expected an array or \"random\"");
      }
    } else {
      a.sensors = f.IntList("sensors");
    }
  }
  a.gain = f.Number("gain", 0.0);
  a.amplitude = f.Number("amplitude", 0.0);
  if (f.Has("bias")) {
    const Json& b = f.At("bias");
    if (!b.is_array()) throw ParseError(f.Where("bias") + ": expected an array");
    for (size_t i = 0; i < b.size(); ++i) {
      if (!b[i].is_number()) throw ParseError(f.Where("bias") + "/" + std::to_string(i) + ": expected a number");
      a.bias.push_back(b[i].get<double>());
    }
  }
  if (a.kind == AttackKind::kConstant && a.bias.empty()) {
    throw ParseError(f.Where("bias") + ": constant attack needs a bias");
  }
}

void ParseDetector(const Json& j, Scenario& sc) {
  Fields f(j, "/detector", {"epsilon", "eta", "N", "t1", "mode", "riccati_tol", "riccati_max_iter"});
  DetectorConfig& d = sc.detector;
  d.epsilon = f.Number("epsilon", 1.0);
  if (!(d.epsilon > 0.0)) throw ParseError(f.Where("epsilon") + ": must be positive");
  if (f.Has("eta")) {
    const Json& e = f.At("eta");
    if (e.is_string()) {
      if (e.get<std::string>() != "auto") throw ParseError(f.Where("eta") + ": expected a number or \"auto\"");
    } else if (e.is_number()) {
      d.eta = e.get<double>();
      if (*d.eta < 0.0) throw ParseError(f.Where("eta") + ": must be nonnegative");
    } else {
      throw ParseError(f.Where("eta") + ": expected a number or \"auto\"");
    }
  }
  d.window = PositiveInt(f, "N", 20000);
  if (f.Has("t1")) {
    const long long t1 = f.Integer("t1");
    if (t1 < 0) throw ParseError(f.Where("t1") + ": must be nonnegative");
    d.t1 = static_cast<int>(t1);
  }
  try {
    d.mode = FilterModeFromString(f.String("mode", "prediction"));
  } catch (const ConfigError& e) {
    throw ParseError(f.Where("mode") + ": " + e.what());
  }
  d.riccati.tol = f.Number("riccati_tol", d.riccati.tol);
  d.riccati.max_iter = PositiveInt(f, "riccati_max_iter", d.riccati.max_iter);
}

void ParseNoiseless(const Json& j, Scenario& sc) {
  Fields f(j, "/noiseless", {"x0", "corruptions"});
  NoiselessScenario ns;
  ns.x0 = VectorFromJson(f.At("x0"), f.Where("x0"));
  if (f.Has("corruptions")) {
    const Json& list = f.At("corruptions");
    if (!list.is_array()) throw ParseError(f.Where("corruptions") + ": expected an array");
    for (size_t i = 0; i < list.size(); ++i) {
      const std::string path = f.Where("corruptions") + "/" + std::to_string(i);
      Fields c(list[i], path, {"sensor", "x"});
      SymbolCorruption corruption;
      corruption.sensor = PositiveInt(c, "sensor", 0);
      corruption.x = VectorFromJson(c.At("x"), c.Where("x"));
      ns.corruptions.push_back(std::move(corruption));
    }
  }
  sc.noiseless = std::move(ns);
}

std::pair<int, int> LineColumn(const std::string& text, size_t byte) {
  int line = 1;
  int col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

const char* ToString(SearchMethod method) {
  switch (method) {
    case SearchMethod::kExhaustive: return "exhaustive";
    case SearchMethod::kSmt: return "smt";
    case SearchMethod::kBoth: return "both";
  }
  return "both";
}

Scenario ParseScenario(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = LineColumn(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " +
                     std::to_string(col) + ": " + e.what());
  }
  Fields f(root, "", {"schema_version", "name", "model", "attack", "detector", "search", "k",
                      "repetitions", "seed", "horizon", "x0", "sweep", "noiseless", "output"});
  const long long version = f.Integer("schema_version", kSchemaVersion);
  if (version != kSchemaVersion) {
    throw ParseError("/schema_version: unsupported version " + std::to_string(version));
  }
  Scenario sc;
  sc.name = f.String("name", "");
  ParseModel(f.At("model"), sc);
  if (f.Has("attack")) ParseAttack(f.At("attack"), sc);
  if (f.Has("detector")) ParseDetector(f.At("detector"), sc);
  const std::string search = f.String("search", "both");
  if (search == "exhaustive") {
    sc.search = SearchMethod::kExhaustive;
  } else if (search == "smt") {
    sc.search = SearchMethod::kSmt;
  } else if (search == "both") {
    sc.search = SearchMethod::kBoth;
  } else {
    throw ParseError("/search: expected exhaustive, smt or both");
  }
  if (f.Has("k")) {
    const long long k = f.Integer("k");
    if (k < 0) throw ParseError("/k: must be nonnegative");
    sc.k = static_cast<int>(k);
    sc.k_given = true;
  }
  sc.detector.k = sc.k;
  sc.repetitions = PositiveInt(f, "repetitions", 1);
  sc.seed = Seed(f, "seed", 1);
  if (f.Has("horizon")) sc.horizon = PositiveInt(f, "horizon", 0);
  if (f.Has("x0")) sc.x0 = VectorFromJson(f.At("x0"), "/x0");
  if (f.Has("sweep")) {
    Fields s(f.At("sweep"), "/sweep", {"p"});
    sc.sweep_p = s.IntList("p");
    for (int p : sc.sweep_p) {
      if (p < 2) throw ParseError("/sweep/p: every p must be at least 2");
    }
  }
  if (f.Has("noiseless")) ParseNoiseless(f.At("noiseless"), sc);
  if (f.Has("output")) {
    Fields o(f.At("output"), "/output", {"dir", "format"});
    sc.output_dir = o.String("dir", sc.output_dir);
    sc.format = o.String("format", sc.format);
    if (sc.format != "csv" && sc.format != "json") throw ParseError("/output/format: expected csv or json");
  }

  // Cross-field checks that do not need the model built.
  const int p = sc.explicit_model ? sc.explicit_model->p() : sc.random_model->p;
  const int n = sc.explicit_model ? sc.explicit_model->n() : sc.random_model->n;
  if (p > 0 && sc.k_given && sc.k >= p) throw ParseError("/k: must be smaller than p = " + std::to_string(p));
  if (p > 0 && sc.attack.sensors) {
    for (int j : *sc.attack.sensors) {
      if (j < 1 || j > p) throw ParseError("/attack/sensors: sensor " + std::to_string(j) + " outside 1.." + std::to_string(p));
    }
  }
  if (sc.detector.window < n) throw ParseError("/detector/N: must be at least n = " + std::to_string(n));
  if (sc.x0 && sc.x0->size() != n) throw ParseError("/x0: expected " + std::to_string(n) + " entries");
  return sc;
}

Scenario LoadScenario(const std::string& path) { return ParseScenario(ReadTextFile(path)); }

SystemModel BuildModel(const Scenario& sc, std::optional<int> p_override) {
  if (sc.explicit_model) {
    if (p_override && *p_override != sc.explicit_model->p()) {
      throw ConfigError("a sweep over p needs a random model");
    }
    return *sc.explicit_model;
  }
  const RandomModelSpec& r = *sc.random_model;
  const int p = p_override.value_or(r.p);
  if (p < 1) throw ConfigError("random model needs p (in the model or a sweep)");
  // Each p of a sweep gets its own system, reproducible from the model seed.
  const std::uint64_t seed = p_override ? RepetitionSeed(r.seed, p) : r.seed;
  return MakeRandomStableSystem(r.n, p, r.spectral_radius, seed, sc.sigma_w2, sc.sigma_v2);
}

AttackSpec BuildAttack(const Scenario& sc, int p, int k, std::uint64_t rep_seed) {
  const AttackScenario& a = sc.attack;
  if (a.kind == AttackKind::kNone) return AttackSpec::None();
  std::vector<int> sensors = a.sensors ? *a.sensors : RandomSensors(p, k, rep_seed);
  AttackSpec spec;
  switch (a.kind) {
    case AttackKind::kZeroOutput: spec = AttackSpec::ZeroOutput(std::move(sensors)); break;
    case AttackKind::kNoiseLinear: spec = AttackSpec::NoiseLinear(std::move(sensors), a.gain); break;
    case AttackKind::kConstant: {
      std::vector<double> bias = a.bias;
      // A single bias value applies to every attacked sensor.
      if (bias.size() == 1) bias.assign(sensors.size(), bias.front());
      spec = AttackSpec::Constant(std::move(sensors), std::move(bias));
      break;
    }
    case AttackKind::kSeededRandom: spec = AttackSpec::SeededRandom(std::move(sensors), a.amplitude); break;
    default: break;
  }
  spec.Validate(p);
  return spec;
}

std::uint64_t RepetitionSeed(std::uint64_t base, int rep) {
  // splitmix64 finalizer over (base, rep)
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(rep + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int SweepK(const Scenario& sc, int p) { return sc.k_given ? sc.k : p / 3; }

int ScenarioHorizon(const Scenario& sc, int n) {
  const int needed = sc.detector.RequiredHorizon(n);
  if (sc.horizon) {
    if (*sc.horizon < needed) {
      throw ConfigError("horizon " + std::to_string(*sc.horizon) + " shorter than the " +
                        std::to_string(needed) + " steps the detector window needs");
    }
    return *sc.horizon;
  }
  return needed;
}

}  // namespace secest
