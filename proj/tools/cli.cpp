#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <thread>

#include "alctrie/analysis.hpp"
#include "alctrie/lctrie.hpp"
#include "alctrie/montecarlo.hpp"
#include "alctrie/report.hpp"
#include "alctrie/source.hpp"

namespace alctrie::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string n;
  std::string lambda;
  double p = 0.5;
  std::string alpha = "0.5";
  std::string k = "0..20";
  std::uint64_t trials = 100;
  std::uint64_t seed = 1;
  unsigned jobs = 0;
  std::string format = "csv";
  std::string keys;
  std::string queries;
  bool summary = false;
};

json cell_to_json(const Cell& cell) {
  struct Visitor {
    json operator()(std::monostate) const { return nullptr; }
    json operator()(std::int64_t v) const { return v; }
    json operator()(double v) const { return std::isfinite(v) ? json(v) : json(nullptr); }
    json operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, cell);
}

json table_to_json(const Table& table) {
  json rows = json::array();
  for (const auto& row : table.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = cell_to_json(row[i]);
    rows.push_back(std::move(obj));
  }
  return rows;
}

void emit(const Table& table, const Flags& flags, const json& config, std::ostream& out,
          json extra = json::object()) {
  if (flags.format == "json") {
    json doc = json::object();
    doc["config"] = config;
    for (auto& [key, value] : extra.items()) doc[key] = value;
    doc["rows"] = table_to_json(table);
    out << doc.dump(2) << '\n';
  } else {
    table.write_csv(out);
  }
}

std::vector<double> values_of(const std::string& text, const std::string& flag) {
  try {
    return parse_range(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

void check_p(const Flags& f) {
  if (!(f.p > 0.0 && f.p < 1.0)) throw UsageError("--p must lie strictly between 0 and 1");
}

std::vector<double> alphas_of(const Flags& f) {
  auto alphas = values_of(f.alpha, "--alpha");
  for (double a : alphas)
    if (!(a > 0.0 && a <= 1.0)) throw UsageError("--alpha values must lie in (0,1]");
  return alphas;
}

struct Sizes {
  SizeModel model;
  std::vector<double> values;
};

/// Exactly one of --n / --lambda.
Sizes sizes_of(const Flags& f) {
  if (f.n.empty() == f.lambda.empty()) throw UsageError("give exactly one of --n or --lambda");
  if (!f.n.empty()) {
    auto values = values_of(f.n, "--n");
    for (double v : values)
      if (v < 0 || v != std::floor(v)) throw UsageError("--n values must be non-negative integers");
    return {SizeModel::fixed, values};
  }
  auto values = values_of(f.lambda, "--lambda");
  for (double v : values)
    if (!(v > 0.0)) throw UsageError("--lambda values must be positive");
  return {SizeModel::poisson, values};
}

std::vector<std::uint32_t> levels_of(const Flags& f) {
  std::vector<std::uint32_t> out;
  for (double v : values_of(f.k, "--k")) {
    if (v < 0 || v != std::floor(v) || v > 4096) throw UsageError("--k values must be integers in [0,4096]");
    out.push_back(static_cast<std::uint32_t>(v));
  }
  return out;
}

const char* model_name(SizeModel m) { return m == SizeModel::fixed ? "fixed" : "poisson"; }

json config_echo(const std::string& command, const Flags& f) {
  json c = json::object();
  c["command"] = command;
  c["p"] = f.p;
  if (!f.n.empty()) c["n"] = f.n;
  if (!f.lambda.empty()) c["lambda"] = f.lambda;
  c["alpha"] = f.alpha;
  return c;
}

json sim_echo(const std::string& command, const Flags& f) {
  json c = config_echo(command, f);
  c["trials"] = f.trials;
  c["seed"] = f.seed;
  return c;
}

ExperimentConfig experiment(const Flags& f, SizeModel model, double size, double alpha) {
  ExperimentConfig c;
  c.params = {f.p, alpha, model, size};
  c.trials = f.trials;
  c.seed = f.seed;
  c.jobs = f.jobs;
  if (c.trials == 0) throw UsageError("--trials must be at least 1");
  return c;
}

int cmd_predict(const Flags& f, std::ostream& out) {
  check_p(f);
  const Sizes sizes = sizes_of(f);
  Table table{{"model", "n_or_lambda", "p", "alpha", "k", "value"}, {}};
  for (double size : sizes.values) {
    for (double alpha : alphas_of(f)) {
      if (alpha >= 1.0) throw UsageError("--alpha must be below 1 for predict");
      if (size <= 1.0) throw UsageError("predict needs --n/--lambda above 1");
      const double closed = predict_level_closed_form(size, alpha, f.p);
      table.add_row({std::string("closed_form"), size, f.p, alpha,
                     static_cast<std::int64_t>(std::llround(closed)), closed});
      const ModelParams params{f.p, alpha, sizes.model, size};
      Cell k_cal, e_cal;
      try {
        const auto k = predict_level_calibrated(params);
        k_cal = std::int64_t{k};
        e_cal = expected_fill_fraction(params, k);
      } catch (const std::domain_error&) {
        // no level reaches alpha in expectation
      }
      table.add_row({std::string("calibrated_") + model_name(sizes.model), size, f.p, alpha, k_cal,
                     e_cal});
      if (f.p != 0.5) {
        if (size >= 16.0)
          table.add_row({std::string("full_fillup"), size, f.p, alpha, Cell{},
                         predict_full_fillup(size, f.p)});
        table.add_row({std::string("depth_constant_alpha_lc"), size, f.p, alpha, Cell{},
                       depth_constant(f.p, LcVariant::alpha_lc)});
        table.add_row({std::string("depth_constant_full_lc"), size, f.p, alpha, Cell{},
                       depth_constant(f.p, LcVariant::full_lc)});
      }
    }
  }
  emit(table, f, config_echo("predict", f), out);
  return kOk;
}

int cmd_expect(const Flags& f, bool alpha_given, std::ostream& out) {
  check_p(f);
  const Sizes sizes = sizes_of(f);
  const auto levels = levels_of(f);
  Table table{{"model", "n_or_lambda", "p", "alpha", "k", "value"}, {}};
  const Cell alpha_cell = alpha_given ? Cell{alphas_of(f).front()} : Cell{};
  for (double size : sizes.values) {
    const ModelParams params{f.p, 0.5, sizes.model, size};
    for (std::uint32_t k : levels)
      table.add_row({std::string(model_name(sizes.model)), size, f.p, alpha_cell, std::int64_t{k},
                     expected_fill_fraction(params, k)});
  }
  emit(table, f, config_echo("expect", f), out);
  return kOk;
}

int cmd_sim_fillup(const Flags& f, std::ostream& out) {
  check_p(f);
  const Sizes sizes = sizes_of(f);
  const auto alphas = alphas_of(f);
  if (sizes.model == SizeModel::fixed)
    for (double n : sizes.values)
      if (n < 2) throw UsageError("--n must be at least 2 for sim-fillup");
  if (f.summary) {
    const ExperimentConfig base = experiment(f, sizes.model, sizes.values.front(), alphas.front());
    emit(fillup_sweep_report(base, sizes.values, alphas), f, sim_echo("sim-fillup", f), out);
    return kOk;
  }
  if (sizes.values.size() != 1 || alphas.size() != 1)
    throw UsageError("--n/--lambda and --alpha lists need --summary");
  const FillupHistogram hist =
      simulate_fillup(experiment(f, sizes.model, sizes.values.front(), alphas.front()));
  json extra = json::object();
  json freq = json::object();
  for (const auto& [level, count] : hist.frequencies) freq[std::to_string(level)] = count;
  extra["histogram"] = freq;
  extra["undefined"] = hist.undefined;
  extra["mode"] = hist.defined() ? json(hist.mode()) : json(nullptr);
  extra["top_two_mass"] = hist.top_two_mass();
  emit(fillup_trials_table(hist), f, sim_echo("sim-fillup", f), out, extra);
  return kOk;
}

int cmd_sim_depth(const Flags& f, std::ostream& out) {
  check_p(f);
  const Sizes sizes = sizes_of(f);
  if (sizes.model != SizeModel::fixed) throw UsageError("sim-depth takes --n, not --lambda");
  const auto alphas = alphas_of(f);
  if (alphas.size() != 1) throw UsageError("--alpha takes a single value for sim-depth");
  for (double n : sizes.values)
    if (n < 2) throw UsageError("--n must be at least 2 for sim-depth");
  const ExperimentConfig base = experiment(f, SizeModel::fixed, sizes.values.front(), alphas.front());
  if (f.summary) {
    emit(depth_sweep_report(base, sizes.values), f, sim_echo("sim-depth", f), out);
    return kOk;
  }
  Table all{{"trial", "n", "D", "consumed_total"}, {}};
  json summaries = json::array();
  for (double n : sizes.values) {
    ExperimentConfig c = base;
    c.params.size = n;
    const DepthSummary s = simulate_depth(c);
    for (auto& row : depth_trials_table(s).rows) all.rows.push_back(std::move(row));
    summaries.push_back({{"n", s.n},
                         {"mean", s.mean},
                         {"variance", s.variance},
                         {"median", s.median},
                         {"q90", s.q90},
                         {"mean_over_log", s.mean_over_log}});
  }
  emit(all, f, sim_echo("sim-depth", f), out, {{"summaries", summaries}});
  return kOk;
}

int cmd_sim_expect(const Flags& f, std::ostream& out) {
  check_p(f);
  const Sizes sizes = sizes_of(f);
  if (sizes.values.size() != 1) throw UsageError("--n/--lambda takes a single value for sim-expect");
  const auto levels = levels_of(f);
  const ExperimentConfig config = experiment(f, sizes.model, sizes.values.front(), 0.5);
  emit(expectation_report(config, levels), f, sim_echo("sim-expect", f), out);
  return kOk;
}

double build_alpha(const Flags& f) {
  const auto alphas = alphas_of(f);
  if (alphas.size() != 1) throw UsageError("--alpha takes a single value here");
  return alphas.front();
}

int cmd_build(const Flags& f, std::ostream& out) {
  if (f.keys.empty()) throw UsageError("--keys is required");
  const double alpha = build_alpha(f);
  const AlcTrie alc = AlcTrie::compress(load_keys(f.keys), alpha);
  const AlcStats st = alc.structure_stats();
  Table table{{"metric", "value"}, {}};
  auto add = [&](const std::string& name, Cell v) { table.add_row({name, std::move(v)}); };
  add("keys", std::int64_t{alc.keys().size()});
  add("alpha", alpha);
  add("compressed_nodes", static_cast<std::int64_t>(st.compressed_nodes));
  add("external_nodes", static_cast<std::int64_t>(st.external_nodes));
  add("total_slots", static_cast<std::int64_t>(st.total_slots));
  add("empty_slots", static_cast<std::int64_t>(st.empty_slots));
  add("empty_slot_fraction", st.empty_slot_fraction);
  add("mean_consumed", st.mean_consumed);
  add("mean_degree", st.mean_degree);
  add("max_depth", std::int64_t{st.max_depth});
  add("mean_depth", st.mean_depth);
  for (const auto& [consumed, count] : st.consumed_histogram)
    add("consumed_" + std::to_string(consumed), static_cast<std::int64_t>(count));
  json echo = {{"command", "build"}, {"keys", f.keys}, {"alpha", alpha}};
  emit(table, f, echo, out);
  return kOk;
}

int cmd_query(const Flags& f, std::ostream& out) {
  if (f.keys.empty() || f.queries.empty()) throw UsageError("--keys and --queries are required");
  const double alpha = build_alpha(f);
  const AlcTrie alc = AlcTrie::compress(load_keys(f.keys), alpha);
  const auto queries = load_queries(f.queries);
  if (f.format == "json") {
    json rows = json::array();
    for (const BitString& q : queries) {
      const auto m = alc.longest_prefix_match(q);
      rows.push_back({{"query", q.to_string()},
                      {"key", m ? json(m->key) : json(nullptr)},
                      {"prefix_length", m ? json(m->prefix_length) : json(nullptr)}});
    }
    json doc = {{"config", {{"command", "query"}, {"keys", f.keys}, {"queries", f.queries},
                            {"alpha", alpha}}},
                {"rows", rows}};
    out << doc.dump(2) << '\n';
    return kOk;
  }
  for (const BitString& q : queries) {
    if (const auto m = alc.longest_prefix_match(q))
      out << m->key << ' ' << m->prefix_length << '\n';
    else
      out << "none\n";
  }
  return kOk;
}

}  // namespace

std::vector<double> parse_range(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) throw std::invalid_argument("empty value");
  if (auto dots = text.find(".."); dots != std::string::npos) {
    const std::string lo_s = text.substr(0, dots), hi_s = text.substr(dots + 2);
    std::size_t u1 = 0, u2 = 0;
    long long lo = 0, hi = 0;
    try {
      lo = std::stoll(lo_s, &u1);
      hi = std::stoll(hi_s, &u2);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad range '" + text + "'");
    }
    if (u1 != lo_s.size() || u2 != hi_s.size() || lo > hi)
      throw std::invalid_argument("bad range '" + text + "'");
    for (long long v = lo; v <= hi; ++v) out.push_back(static_cast<double>(v));
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad value '" + part + "'");
    }
    if (used != part.size() || !std::isfinite(v)) throw std::invalid_argument("bad value '" + part + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Partial-fillup level-compressed tries: predictors, expectations, simulations, LPM",
               "alctrie"};
  app.require_subcommand(1);
  Flags f;

  auto size_opts = [&](CLI::App* sub) {
    sub->add_option("--n", f.n, "Number of strings: a value, a list a,b,c or a range a..b");
    sub->add_option("--lambda", f.lambda, "Poisson mean number of strings (value, list or range)");
  };
  auto p_opt = [&](CLI::App* sub) {
    sub->add_option("--p", f.p, "Probability of a 1 bit, a decimal in (0,1)")->capture_default_str();
  };
  auto alpha_opt = [&](CLI::App* sub, const std::string& help) {
    sub->add_option("--alpha", f.alpha, help)->capture_default_str();
  };
  auto format_opt = [&](CLI::App* sub) {
    sub->add_option("--format", f.format, "Output encoding: csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  };
  auto sim_opts = [&](CLI::App* sub) {
    sub->add_option("--trials", f.trials, "Number of Monte Carlo trials")->capture_default_str();
    sub->add_option("--seed", f.seed, "Seed; fully determines the output")->capture_default_str();
    sub->add_option("--jobs", f.jobs, "Worker threads (0 = all cores); output is identical for any value")
        ->capture_default_str();
  };

  auto* predict = app.add_subcommand("predict", "Closed-form and calibrated alpha-fillup levels, depth constants");
  size_opts(predict);
  p_opt(predict);
  alpha_opt(predict, "Fill fraction(s) in (0,1)");
  format_opt(predict);

  auto* expect = app.add_subcommand("expect", "Exact E[X_k/2^k] table over levels k");
  size_opts(expect);
  p_opt(expect);
  auto* expect_alpha = expect->add_option("--alpha", f.alpha, "Echoed into the alpha column only");
  expect->add_option("--k", f.k, "Levels: a..b, a list, or one value")->capture_default_str();
  format_opt(expect);

  auto* sim_fillup = app.add_subcommand("sim-fillup", "Monte Carlo alpha-fillup level histogram");
  size_opts(sim_fillup);
  p_opt(sim_fillup);
  alpha_opt(sim_fillup, "Fill fraction(s) in (0,1]");
  sim_opts(sim_fillup);
  sim_fillup->add_flag("--summary", f.summary, "One summary row per (n, alpha) instead of per-trial rows");
  format_opt(sim_fillup);

  auto* sim_depth = app.add_subcommand("sim-depth", "Monte Carlo depth of a designated key in alpha-LC tries");
  sim_depth->add_option("--n", f.n, "Number of strings: a value, a list a,b,c or a range a..b");
  p_opt(sim_depth);
  alpha_opt(sim_depth, "Fill fraction in (0,1]");
  sim_opts(sim_depth);
  sim_depth->add_flag("--summary", f.summary, "One summary row per n instead of per-trial rows");
  format_opt(sim_depth);

  auto* sim_expect = app.add_subcommand("sim-expect", "Monte Carlo X_k/2^k means against the exact expectation");
  size_opts(sim_expect);
  p_opt(sim_expect);
  sim_expect->add_option("--k", f.k, "Levels: a..b, a list, or one value")->capture_default_str();
  sim_opts(sim_expect);
  format_opt(sim_expect);

  auto* build = app.add_subcommand("build", "Build an alpha-LC trie from a key file and report its structure");
  build->add_option("--keys", f.keys, "Key file: 0/1 strings or IPv4 CIDR, one per line");
  alpha_opt(build, "Fill fraction in (0,1]");
  format_opt(build);

  auto* query = app.add_subcommand("query", "Longest-prefix match of each query against a key file");
  query->add_option("--keys", f.keys, "Key file: 0/1 strings or IPv4 CIDR, one per line");
  query->add_option("--queries", f.queries, "Query file, same format as the key file");
  alpha_opt(query, "Fill fraction in (0,1]");
  format_opt(query);

  std::vector<std::string> argv_storage{"alctrie"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return kUsageError;
  }

  try {
    if (*predict) return cmd_predict(f, out);
    if (*expect) return cmd_expect(f, expect_alpha->count() > 0, out);
    if (*sim_fillup) return cmd_sim_fillup(f, out);
    if (*sim_depth) return cmd_sim_depth(f, out);
    if (*sim_expect) return cmd_sim_expect(f, out);
    if (*build) return cmd_build(f, out);
    if (*query) return cmd_query(f, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::domain_error& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace alctrie::cli
