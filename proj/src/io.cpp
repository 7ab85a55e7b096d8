#include "qkm/io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qkm/errors.hpp"

namespace qkm {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

// cpp_int reads a leading 0 as an octal prefix
BigInt decimal(std::string_view digits) {
  const std::size_t first = digits.find_first_not_of('0');
  if (first == std::string_view::npos) return BigInt(0);
  return BigInt(std::string(digits.substr(first)));
}

BigInt parse_integer(std::string_view token, std::size_t line) {
  std::string_view digits = token;
  bool negative = false;
  if (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) {
    negative = digits[0] == '-';
    digits.remove_prefix(1);
  }
  if (!all_digits(digits)) throw ParseError("not an integer: '" + std::string(token) + "'", line);
  BigInt v = decimal(digits);
  return negative ? BigInt(-v) : v;
}

BigInt pow10(std::size_t e) {
  BigInt p = 1;
  for (std::size_t i = 0; i < e; ++i) p *= 10;
  return p;
}

BigInt round_half_away(const Fraction& f) {
  const BigInt two_q = 2 * f.den();
  if (f.num() >= 0) return (2 * f.num() + f.den()) / two_q;
  return -((-2 * f.num() + f.den()) / two_q);
}

std::vector<std::pair<std::size_t, std::vector<std::string_view>>> token_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::vector<std::string_view>>> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) tokens.push_back(line.substr(i, j - i));
      i = j;
    }
    if (tokens.empty() || tokens.front().front() == '#') continue;
    out.emplace_back(line_no, std::move(tokens));
  }
  return out;
}

std::string config_line(const Json& config) { return "# config: " + config.dump() + "\n"; }

std::string centroid_cell(const FractionVector& c) { return c.str(';'); }

std::string fixed(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

Json payload_json(const PayloadStats& p) {
  return Json{{"messages", p.messages}, {"total_bits", p.bits}, {"max_bits", p.max_bits}};
}

}  // namespace

Fraction parse_number(std::string_view token, std::size_t line) {
  if (token.empty()) throw ParseError("empty number", line);
  const std::size_t slash = token.find('/');
  if (slash != std::string_view::npos) {
    BigInt num = parse_integer(token.substr(0, slash), line);
    std::string_view den_text = token.substr(slash + 1);
    if (!all_digits(den_text)) throw ParseError("bad denominator in '" + std::string(token) + "'", line);
    BigInt den = decimal(den_text);
    if (den == 0) throw ParseError("zero denominator in '" + std::string(token) + "'", line);
    return Fraction(std::move(num), std::move(den));
  }
  const std::size_t dot = token.find('.');
  if (dot == std::string_view::npos) return Fraction(parse_integer(token, line));
  std::string_view whole = token.substr(0, dot);
  std::string_view frac = token.substr(dot + 1);
  bool negative = false;
  if (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) {
    negative = whole[0] == '-';
    whole.remove_prefix(1);
  }
  if ((whole.empty() && frac.empty()) || (!whole.empty() && !all_digits(whole)) ||
      (!frac.empty() && !all_digits(frac))) {
    throw ParseError("not a number: '" + std::string(token) + "'", line);
  }
  BigInt num = decimal(std::string(whole) + std::string(frac));
  if (negative) num = -num;
  return Fraction(std::move(num), pow10(frac.size()));
}

std::vector<IntVector> parse_observations(std::string_view text, std::int64_t scale) {
  if (scale <= 0) throw std::invalid_argument("scale must be positive");
  std::vector<IntVector> out;
  for (const auto& [line, tokens] : token_lines(text)) {
    if (!out.empty() && tokens.size() != out.front().size()) {
      throw ParseError("expected " + std::to_string(out.front().size()) + " values, got " +
                           std::to_string(tokens.size()),
                       line);
    }
    IntVector v;
    v.reserve(tokens.size());
    for (auto t : tokens) v.push_back(round_half_away(parse_number(t, line) * Fraction(scale)));
    out.push_back(std::move(v));
  }
  if (out.empty()) throw ParseError("no vectors");
  return out;
}

CentroidSet parse_centroids(std::string_view text, std::int64_t scale) {
  if (scale <= 0) throw std::invalid_argument("scale must be positive");
  CentroidSet set;
  for (const auto& [line, tokens] : token_lines(text)) {
    if (set.k() > 0 && tokens.size() != set.dim()) {
      throw ParseError("expected " + std::to_string(set.dim()) + " values, got " + std::to_string(tokens.size()),
                       line);
    }
    std::vector<Fraction> comps;
    comps.reserve(tokens.size());
    for (auto t : tokens) comps.push_back(parse_number(t, line) * Fraction(scale));
    set.centroids.push_back(FractionVector::from_components(comps));
  }
  if (set.k() == 0) throw ParseError("no centroids");
  return set;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

Json fractions_json(const FractionVector& v) {
  Json arr = Json::array();
  for (const auto& c : v.components()) arr.push_back(c.str());
  return arr;
}

Json config_json(const ExperimentConfig& c) {
  Json j{{"n", c.n},
         {"k", c.k},
         {"d", c.dim},
         {"box_lo", c.box_lo},
         {"box_hi", c.box_hi},
         {"graph_seed", c.graph_seed},
         {"observation_seed", c.observation_seed},
         {"centroid_seed", c.centroid_seed},
         {"edge_probability", c.edge_probability},
         {"max_rounds", c.max_rounds},
         {"scale", c.scale}};
  j["d_bound"] = c.d_bound ? Json(*c.d_bound) : Json("auto");
  return j;
}

std::string consensus_trace_csv(const ConsensusTrace& trace, const Json& config) {
  std::ostringstream out;
  out << config_line(config) << "step,messages,all_at_average\n";
  for (std::size_t s = 0; s < trace.messages_per_step.size(); ++s) {
    out << s << ',' << trace.messages_per_step[s] << ',' << (trace.at_average[s] ? 1 : 0) << '\n';
  }
  return out.str();
}

Json consensus_summary(const ConsensusTrace& trace, const Json& config) {
  Json estimates = Json::array();
  for (const auto& e : trace.final_estimates) estimates.push_back(e ? fractions_json(*e) : Json(nullptr));
  return Json{{"schema", "qkm.consensus/1"},
              {"config", config},
              {"n", trace.n},
              {"m", trace.m},
              {"d", trace.dim},
              {"average", fractions_json(trace.average)},
              {"S_t", trace.convergence_step},
              {"steps_run", trace.steps_run},
              {"bound_nm2", trace.bound},
              {"bound_ok", trace.bound_ok},
              {"converged", trace.converged},
              {"conservation_ok", trace.conservation_ok},
              {"payload", payload_json(trace.payload)},
              {"estimates", estimates},
              {"failure", trace.failure},
              {"pass", trace.ok()}};
}

std::string kmeans_trace_csv(const KMeansTrace& trace, const Json& config) {
  std::ostringstream out;
  out << config_line(config) << "T,steps,messages,F_num,F_den";
  for (std::size_t cl = 0; cl < trace.k; ++cl) out << ",c_" << cl + 1;
  out << '\n';
  for (const auto& r : trace.rounds) {
    const Fraction f = reduce(r.objective);
    out << r.round << ',' << r.steps << ',' << r.consensus_messages + r.extrema_messages << ',' << f.num() << ','
        << f.den();
    for (const auto& c : r.centroids.centroids) out << ',' << centroid_cell(c);
    out << '\n';
  }
  return out.str();
}

std::string objective_csv(const KMeansTrace& trace, const Json& config) {
  std::ostringstream out;
  out << config_line(config) << "T,F_num,F_den,F_float\n";
  for (const auto& r : trace.rounds) {
    const Fraction f = reduce(r.objective);
    out << r.round << ',' << f.num() << ',' << f.den() << ',' << fixed(f.to_double()) << '\n';
  }
  return out.str();
}

std::string trajectories_csv(const KMeansTrace& trace, const Json& config) {
  std::ostringstream out;
  out << config_line(config) << "cluster,T";
  for (std::size_t i = 0; i < trace.dim; ++i) out << ",x" << i + 1 << "_float";
  out << '\n';
  for (std::size_t cl = 0; cl < trace.k; ++cl) {
    auto row = [&](std::size_t T, const FractionVector& c) {
      out << cl + 1 << ',' << T;
      for (double v : c.to_doubles()) out << ',' << fixed(v);
      out << '\n';
    };
    row(0, trace.initial.centroids[cl]);
    for (const auto& r : trace.rounds) row(r.round, r.centroids.centroids[cl]);
  }
  return out.str();
}

std::string assignments_csv(const KMeansTrace& trace, const Json& config) {
  std::ostringstream out;
  out << config_line(config) << "node,cluster\n";
  if (!trace.rounds.empty()) {
    const auto& a = trace.rounds.back().assignments;
    for (std::size_t j = 0; j < a.size(); ++j) out << j << ',' << a[j] + 1 << '\n';
  }
  return out.str();
}

std::string messages_csv(const std::vector<MessageLogEntry>& log, const Json& config) {
  std::ostringstream out;
  out << config_line(config) << "step,sender,receiver,label,z,y\n";
  for (const auto& e : log) {
    out << e.step << ',' << e.sender << ',' << e.receiver << ',' << e.label + 1 << ',' << e.mass.z << ',';
    for (std::size_t i = 0; i < e.mass.y.size(); ++i) out << (i ? ";" : "") << e.mass.y[i];
    out << '\n';
  }
  return out.str();
}

Json kmeans_summary(const KMeansTrace& trace, const Json& config,
                    const std::optional<EquivalenceReport>& equivalence) {
  Json centroids = Json::array();
  const CentroidSet& final_set = trace.rounds.empty() ? trace.initial : trace.rounds.back().centroids;
  for (const auto& c : final_set.centroids) centroids.push_back(fractions_json(c));
  Json j{{"schema", "qkm.kmeans/1"},
         {"config", config},
         {"n", trace.n},
         {"m", trace.m},
         {"D", trace.diameter},
         {"D_bound", trace.d_bound},
         {"k", trace.k},
         {"d", trace.dim},
         {"T", trace.T()},
         {"terminated", trace.terminated},
         {"C_t", trace.total_steps},
         {"step_bound", trace.step_bound},
         {"bound_ok", trace.bound_ok},
         {"conservation_ok", trace.conservation_ok},
         {"objective_monotone", trace.objective_monotone},
         {"termination_step", trace.termination_step},
         {"post_termination_steps", trace.post_termination_steps},
         {"post_termination_messages", trace.post_termination_messages},
         {"silence_ok", trace.silence_ok},
         {"consensus_payload", payload_json(trace.consensus_payload)},
         {"extrema_messages", trace.extrema_messages},
         {"final_centroids", centroids},
         {"failure", trace.failure}};
  bool pass = trace.checks_ok();
  if (equivalence) {
    j["equivalence"] = Json{{"pass", equivalence->pass},
                            {"diverging_round", equivalence->diverging_round},
                            {"diverging_cluster", equivalence->diverging_cluster},
                            {"message", equivalence->message}};
    pass = pass && equivalence->pass;
  }
  j["pass"] = pass;
  return j;
}

std::string sweep_runs_csv(const SweepResult& result, const Json& config) {
  std::ostringstream out;
  out << config_line(config)
      << "index,graph_seed,observation_seed,centroid_seed,m,D,T,C_t,step_bound,bound_ok,objective_monotone,"
         "silence_ok,F_num,F_den\n";
  for (const auto& run : result.runs) {
    const auto& t = run.trace;
    const Fraction f = reduce(t.rounds.back().objective);
    out << run.index << ',' << run.config.graph_seed << ',' << run.config.observation_seed << ','
        << run.config.centroid_seed << ',' << t.m << ',' << t.diameter << ',' << t.T() << ',' << t.total_steps << ','
        << t.step_bound << ',' << t.bound_ok << ',' << t.objective_monotone << ',' << t.silence_ok << ',' << f.num()
        << ',' << f.den() << '\n';
  }
  return out.str();
}

std::string histogram_csv(const SweepResult& result, const Json& config) {
  std::ostringstream out;
  out << config_line(config) << "T,count\n";
  for (const auto& [T, count] : result.histogram) out << T << ',' << count << '\n';
  return out.str();
}

std::string mean_objective_csv(const SweepResult& result, const Json& config) {
  std::ostringstream out;
  out << config_line(config) << "T,mean_F_float\n";
  for (std::size_t t = 0; t < result.mean_objective.size(); ++t) {
    out << t + 1 << ',' << fixed(result.mean_objective[t]) << '\n';
  }
  return out.str();
}

Json sweep_summary(const SweepResult& result, const Json& config) {
  std::size_t sum = 0;
  bool pass = true;
  for (const auto& run : result.runs) {
    sum += run.trace.T();
    pass = pass && run.trace.ok();
  }
  Json histogram = Json::array();
  for (const auto& [T, count] : result.histogram) histogram.push_back(Json{{"T", T}, {"count", count}});
  return Json{{"schema", "qkm.sweep/1"},
              {"config", config},
              {"runs", result.runs.size()},
              {"mean_T", reduce(Fraction(BigInt(sum), BigInt(result.runs.size()))).str()},
              {"min_T", result.min_T},
              {"max_T", result.max_T},
              {"histogram", histogram},
              {"pass", pass}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace qkm
