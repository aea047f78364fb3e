#include "mdl/cli.hpp"

#include <cstdlib>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdl/characters.hpp"
#include "mdl/compositions.hpp"
#include "mdl/errors.hpp"
#include "mdl/integrator.hpp"
#include "mdl/kernel.hpp"
#include "mdl/oracle.hpp"

namespace mdl::cli {

namespace {

using json = nlohmann::ordered_json;

struct FieldError {
  std::string field;
  std::string message;
};

cplx parse_complex(const std::string& field, const std::string& text) {
  // strict "a+bi" / "a-bi": both parts mandatory, imaginary part ends in i
  const auto fail = [&](const std::string& why) -> cplx {
    throw FieldError{field, "bad complex literal '" + text + "': " + why +
                                " (expected a+bi with both parts)"};
  };
  if (text.empty()) return fail("empty");
  if (text.back() != 'i') return fail("must end in i");
  std::size_t split = std::string::npos;
  for (std::size_t i = 1; i + 1 < text.size(); ++i) {
    if ((text[i] == '+' || text[i] == '-') &&
        !(text[i - 1] == 'e' || text[i - 1] == 'E'))
      split = i; // last such sign starts the imaginary part
  }
  if (split == std::string::npos) return fail("missing real or imaginary part");
  const std::string re_s = text.substr(0, split);
  const std::string im_s = text.substr(split, text.size() - split - 1);
  try {
    std::size_t used = 0;
    const double re = std::stod(re_s, &used);
    if (used != re_s.size()) return fail("trailing junk in real part");
    const std::string im_body = (im_s == "+" || im_s == "-") ? im_s + "1" : im_s;
    const double im = std::stod(im_body, &used);
    if (used != im_body.size()) return fail("trailing junk in imaginary part");
    return {re, im};
  } catch (const std::exception&) {
    return fail("not a number");
  }
}

std::vector<cplx> parse_s_vector(int r, const std::string& text) {
  std::vector<cplx> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_complex("s", item));
  if (static_cast<int>(out.size()) != r)
    throw FieldError{"s", "expected " + std::to_string(r) +
                              " comma-separated complex entries, got " +
                              std::to_string(out.size())};
  return out;
}

std::vector<double> parse_t_vector(int r, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("junk");
    } catch (const std::exception&) {
      throw FieldError{"t", "bad real literal '" + item + "'"};
    }
  }
  if (static_cast<int>(out.size()) != r)
    throw FieldError{"t", "expected " + std::to_string(r) +
                              " comma-separated entries"};
  return out;
}

BoundedSequence parse_seq_spec(const std::string& spec) {
  if (spec == "alt") return BoundedSequence::alternating();
  if (spec.rfind("char:", 0) == 0) {
    const std::string rest = spec.substr(5);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw FieldError{"seq", "char spec needs char:q:e1[,e2,...]"};
    std::uint64_t q = 0;
    try {
      q = std::stoull(rest.substr(0, colon));
    } catch (const std::exception&) {
      throw FieldError{"seq", "bad modulus in '" + spec + "'"};
    }
    std::vector<std::uint32_t> exps;
    std::stringstream ss(rest.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        exps.push_back(static_cast<std::uint32_t>(std::stoul(item)));
      } catch (const std::exception&) {
        throw FieldError{"seq", "bad exponent '" + item + "' in '" + spec + "'"};
      }
    }
    try {
      return BoundedSequence::character(DirichletCharacter(q, exps));
    } catch (const std::invalid_argument& e) {
      throw FieldError{"seq", e.what()};
    }
  }
  if (spec.rfind("file:", 0) == 0) {
    try {
      return load_periodic_sequence(spec.substr(5));
    } catch (const std::invalid_argument& e) {
      throw FieldError{"seq", e.what()};
    }
  }
  throw FieldError{"seq", "unknown sequence spec '" + spec +
                              "' (use char:q:e..., alt, or file:path)"};
}

std::vector<BoundedSequence> parse_seqs(int r,
                                        const std::vector<std::string>& specs) {
  if (static_cast<int>(specs.size()) != r)
    throw FieldError{"seq", "need exactly " + std::to_string(r) +
                                " --seq entries (one per axis), got " +
                                std::to_string(specs.size())};
  std::vector<BoundedSequence> out;
  for (const auto& s : specs) out.push_back(parse_seq_spec(s));
  return out;
}

json cplx_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json s_json(const std::vector<cplx>& s) {
  json a = json::array();
  for (auto z : s) a.push_back(cplx_json(z));
  return a;
}

json result_json(const EvaluationResult& res) {
  json j;
  j["method"] = method_name(res.method);
  j["value"] = cplx_json(res.value);
  j["error_estimate"] = res.error_estimate;
  j["in_D"] = res.in_D;
  j["in_D0"] = res.in_D0;
  j["plan"] = {{"cutoffs", res.plan.cutoffs},
               {"gauss_nodes", res.plan.gauss_nodes},
               {"tail_bound", res.plan.tail_bound},
               {"quadrature_estimate", res.plan.quadrature_estimate}};
  j["wall_time_s"] = res.wall_time_s;
  return j;
}

json report_json(const SummationReport& rep) {
  json j;
  j["method"] = method_name(rep.mode);
  j["value"] = cplx_json(rep.value);
  j["error_estimate"] = rep.spread;
  j["horizons"] = rep.horizons;
  j["wall_time_s"] = rep.wall_time_s;
  return j;
}

std::uint64_t cell_budget(std::uint64_t flag_value, bool flag_set) {
  if (flag_set) return flag_value;
  if (const char* env = std::getenv("MDL_MAX_CELLS")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw FieldError{"MDL_MAX_CELLS", "not an integer"};
    }
  }
  return kDefaultMaxCells;
}

} // namespace

RunResult run(const std::vector<std::string>& args) {
  RunResult rr;
  CLI::App app{"multiple Dirichlet L-series evaluator"};
  app.require_subcommand(1);

  // shared options
  int r = 1;
  std::string s_text;
  std::vector<std::string> seq_specs;
  std::uint64_t n0 = 0;
  double tol = 1e-6;
  std::string method = "integral";
  std::string format = "json";
  std::uint64_t max_cells = kDefaultMaxCells;
  bool max_cells_set = false;
  std::uint64_t max_terms = 0; // 0 = evaluator default
  std::uint64_t positional = 0;
  std::uint64_t traj_x = 64;
  std::string t_text;
  bool explain = false;
  bool with_values = false;
  int trials = 100;
  unsigned seed = 20240601;

  auto add_point_opts = [&](CLI::App* cmd, bool with_seq) {
    cmd->add_option("--r", r, "rank")->required();
    cmd->add_option("--s", s_text, "complex exponents a+bi,c+di,...")
        ->required();
    cmd->add_option("--n0", n0, "base shift (non-negative integer)");
    if (with_seq)
      cmd->add_option("--seq", seq_specs,
                      "per-axis sequence: char:q:e..., alt, file:path");
  };

  auto* eval_cmd = app.add_subcommand("eval", "evaluate by one method");
  add_point_opts(eval_cmd, true);
  eval_cmd->add_option("--tol", tol, "requested tolerance");
  eval_cmd->add_option("--method", method, "integral | direct | iterated-abel")
      ->check(CLI::IsMember({"integral", "direct", "iterated-abel"}));
  eval_cmd->add_option("--max-cells", max_cells, "cell budget")
      ->each([&](const std::string&) { max_cells_set = true; });
  eval_cmd->add_option("--max-terms", max_terms, "series term budget");
  eval_cmd->add_option("--format", format)->check(CLI::IsMember({"json"}));

  auto* compare_cmd =
      app.add_subcommand("compare", "run all applicable methods");
  add_point_opts(compare_cmd, true);
  compare_cmd->add_option("--tol", tol, "requested tolerance");
  compare_cmd->add_option("--max-cells", max_cells, "cell budget")
      ->each([&](const std::string&) { max_cells_set = true; });

  auto* comp_cmd =
      app.add_subcommand("compositions", "dump the kernel coefficient table");
  comp_cmd->add_option("r", positional, "rank")->required();

  auto* chars_cmd =
      app.add_subcommand("characters", "list characters mod q and the "
                                       "generator convention");
  chars_cmd->add_option("q", positional, "modulus")->required();
  chars_cmd->add_flag("--values", with_values, "include value tables");

  auto* region_cmd = app.add_subcommand("region", "classify a point");
  add_point_opts(region_cmd, false);

  auto* lemma_cmd = app.add_subcommand(
      "lemma1-check", "verify the kernel derivative identity at random points");
  lemma_cmd->add_option("r", positional, "rank (>= 3)")->required();
  lemma_cmd->add_option("--trials", trials, "number of random points");
  lemma_cmd->add_option("--seed", seed, "RNG seed");

  auto* traj_cmd =
      app.add_subcommand("trajectory", "outer partial-sum trajectory");
  add_point_opts(traj_cmd, true);
  traj_cmd->add_option("--x", traj_x, "horizon")->required();
  traj_cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

  auto* kernel_cmd = app.add_subcommand("kernel-at", "kernel spot evaluation");
  add_point_opts(kernel_cmd, false);
  kernel_cmd->add_option("--t", t_text, "integration point t1,t2,...")
      ->required();
  kernel_cmd->add_flag("--explain", explain, "per-term breakdown");

  std::vector<const char*> argv;
  argv.push_back("mdl");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      rr.out = app.help();
      rr.exit_code = 0;
      return rr;
    } catch (const CLI::ParseError& e) {
      rr.err = json{{"error", {{"field", "usage"}, {"message", e.what()}}}}
                   .dump() + "\n";
      rr.exit_code = 1;
      return rr;
    }

    json out;

    if (app.got_subcommand(comp_cmd)) {
      if (positional < 1 || positional > 12)
        throw FieldError{"r", "rank must be in [1, 12]"};
      out = json::array();
      for (const auto& term :
           enumerate_compositions(static_cast<int>(positional)))
        out.push_back(json{{"k", term.k}, {"coeff", term.coeff}});
      rr.out = out.dump() + "\n";
      return rr;
    }

    if (app.got_subcommand(chars_cmd)) {
      if (positional < 1) throw FieldError{"q", "modulus must be >= 1"};
      const UnitGroup ug = unit_group(positional);
      out["schema_version"] = 1;
      out["subcommand"] = "characters";
      out["q"] = ug.modulus;
      out["phi"] = ug.phi;
      json gens = json::array();
      for (std::size_t j = 0; j < ug.generators.size(); ++j)
        gens.push_back(json{{"g", ug.generators[j]}, {"order", ug.orders[j]}});
      out["convention"] = {
          {"generators", gens},
          {"note",
           "characters are addressed by exponent vectors on these generators: "
           "the 2-power factor first (-1 then 5 for 2^k with k >= 3), then "
           "the smallest primitive root per odd prime power, primes "
           "increasing; chi(g_j) = exp(2 pi i e_j / order_j)"}};
      json chars = json::array();
      for (const auto& chi : enumerate_characters(positional)) {
        json c{{"exponents", chi.exponents()}, {"principal", chi.principal()}};
        if (with_values) {
          json vals = json::array();
          for (std::uint64_t n = 1; n <= chi.modulus(); ++n)
            vals.push_back(cplx_json(chi.value_c(n)));
          c["values"] = vals;
        }
        chars.push_back(c);
      }
      out["characters"] = chars;
      rr.out = out.dump() + "\n";
      return rr;
    }

    if (app.got_subcommand(lemma_cmd)) {
      if (positional < 3 || positional > 8)
        throw FieldError{"r", "identity check needs rank in [3, 8]"};
      const int rr_rank = static_cast<int>(positional);
      std::mt19937 rng(seed);
      std::uniform_real_distribution<double> ut(1.0, 5.0), ure(-1.0, 2.0),
          uim(-2.0, 2.0);
      double worst = 0.0;
      for (int it = 0; it < trials; ++it) {
        std::vector<double> t(rr_rank);
        for (auto& x : t) x = ut(rng);
        std::vector<cplx> s(rr_rank);
        for (auto& z : s) z = cplx(ure(rng), uim(rng));
        const SPoint pt(s, static_cast<std::uint64_t>(it % 3 == 0 ? 0 : (it % 3 == 1 ? 1 : 7)));
        const cplx lhs = derivative_identity_lhs(t, pt);
        const cplx rhs = derivative_identity_rhs(t, pt);
        worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
      }
      out["schema_version"] = 1;
      out["subcommand"] = "lemma1-check";
      out["r"] = rr_rank;
      out["trials"] = trials;
      out["max_rel_discrepancy"] = worst;
      out["tolerance"] = 1e-10;
      out["pass"] = worst <= 1e-10;
      rr.out = out.dump() + "\n";
      rr.exit_code = worst <= 1e-10 ? 0 : 1;
      return rr;
    }

    if (app.got_subcommand(region_cmd)) {
      const SPoint p(parse_s_vector(r, s_text), n0);
      out["schema_version"] = 1;
      out["subcommand"] = "region";
      out["r"] = r;
      out["s"] = s_json(p.s);
      out["n0"] = n0;
      out["in_D"] = in_domain_D(p);
      out["in_D0"] = in_domain_D0(p);
      rr.out = out.dump() + "\n";
      return rr;
    }

    if (app.got_subcommand(kernel_cmd)) {
      const SPoint p(parse_s_vector(r, s_text), n0);
      const auto t = parse_t_vector(r, t_text);
      KernelValue kv;
      try {
        kv = kernel_eval(t, p, enumerate_compositions(r), explain);
      } catch (const std::invalid_argument& e) {
        throw FieldError{"t", e.what()};
      }
      out["schema_version"] = 1;
      out["subcommand"] = "kernel-at";
      out["r"] = r;
      out["s"] = s_json(p.s);
      out["n0"] = n0;
      out["t"] = t;
      out["value"] = cplx_json(kv.value);
      if (kv.terms) {
        json terms = json::array();
        for (const auto& tv : *kv.terms)
          terms.push_back(json{{"k", tv.k},
                               {"coeff", tv.coeff},
                               {"value", cplx_json(tv.value)}});
        out["terms"] = terms;
      }
      rr.out = out.dump() + "\n";
      return rr;
    }

    if (app.got_subcommand(traj_cmd)) {
      const SPoint p(parse_s_vector(r, s_text), n0);
      const auto seqs = parse_seqs(r, seq_specs);
      const auto points = partial_sum_trajectory(seqs, p, traj_x);
      if (format == "json" && traj_cmd->count("--format")) {
        json pts = json::array();
        for (std::size_t i = 0; i < points.size(); ++i)
          pts.push_back(json{{"x", i + 1},
                             {"re", points[i].real()},
                             {"im", points[i].imag()}});
        out["schema_version"] = 1;
        out["subcommand"] = "trajectory";
        out["points"] = pts;
        rr.out = out.dump() + "\n";
      } else {
        std::ostringstream csv;
        csv << "x,re,im\n";
        csv.precision(17);
        for (std::size_t i = 0; i < points.size(); ++i)
          csv << (i + 1) << ',' << points[i].real() << ',' << points[i].imag()
              << '\n';
        rr.out = csv.str();
      }
      return rr;
    }

    const SPoint p(parse_s_vector(r, s_text), n0);
    const auto seqs = parse_seqs(r, seq_specs);
    const std::uint64_t cells = cell_budget(max_cells, max_cells_set);

    if (app.got_subcommand(eval_cmd)) {
      out["schema_version"] = 1;
      out["subcommand"] = "eval";
      out["r"] = r;
      out["s"] = s_json(p.s);
      out["n0"] = n0;
      json labels = json::array();
      for (const auto& sq : seqs) labels.push_back(sq.label());
      out["sequences"] = labels;
      out["tol"] = tol;
      out["in_D"] = in_domain_D(p);
      out["in_D0"] = in_domain_D0(p);
      try {
        if (method == "integral") {
          const auto res = evaluate_integral(seqs, p, tol, cells);
          out.update(result_json(res));
        } else if (method == "direct") {
          const auto rep =
              evaluate_direct(seqs, p, tol, max_terms ? max_terms : 200'000'000);
          out.update(report_json(rep));
        } else {
          const auto rep = evaluate_iterated_abel(
              seqs, p, tol, max_terms ? max_terms : 50'000'000);
          out.update(report_json(rep));
        }
      } catch (const budget_error& e) {
        out["budget_exhausted"] = true;
        out["message"] = e.what();
        out["value"] = cplx_json(e.value);
        out["error_estimate"] = e.estimate;
        rr.out = out.dump() + "\n";
        rr.exit_code = 3;
        return rr;
      }
      rr.out = out.dump() + "\n";
      return rr;
    }

    if (app.got_subcommand(compare_cmd)) {
      out["schema_version"] = 1;
      out["subcommand"] = "compare";
      out["r"] = r;
      out["s"] = s_json(p.s);
      out["n0"] = n0;
      out["tol"] = tol;
      out["in_D"] = in_domain_D(p);
      out["in_D0"] = in_domain_D0(p);
      json methods = json::array();
      std::vector<std::pair<std::string, cplx>> values;
      std::vector<double> estimates;
      bool bounded = true;
      for (const auto& sq : seqs) bounded = bounded && sq.has_partial_sum_bound();
      if (in_domain_D(p) && bounded && r <= 3) {
        try {
          const auto res = evaluate_integral(seqs, p, tol, cells);
          methods.push_back(result_json(res));
          values.emplace_back("integral", res.value);
          estimates.push_back(res.error_estimate);
        } catch (const budget_error& e) {
          methods.push_back(json{{"method", "integral"},
                                 {"budget_exhausted", true},
                                 {"message", e.what()}});
        }
      }
      if (in_domain_D0(p) && r <= 3) {
        try {
          const auto rep = evaluate_direct(seqs, p, tol);
          methods.push_back(report_json(rep));
          values.emplace_back("direct", rep.value);
          estimates.push_back(rep.spread);
        } catch (const budget_error& e) {
          methods.push_back(json{{"method", "direct"},
                                 {"budget_exhausted", true},
                                 {"message", e.what()}});
        }
      }
      if (in_domain_D(p) && bounded && r <= 2) {
        try {
          const auto rep = evaluate_iterated_abel(seqs, p, tol);
          methods.push_back(report_json(rep));
          values.emplace_back("iterated-abel", rep.value);
          estimates.push_back(rep.spread);
        } catch (const budget_error& e) {
          methods.push_back(json{{"method", "iterated-abel"},
                                 {"budget_exhausted", true},
                                 {"message", e.what()}});
        }
      }
      if (methods.empty())
        throw region_error(
            "compare: no method applies at this point (outside D, or "
            "sequences lack certified bounds)");
      json deltas = json::array();
      for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = i + 1; j < values.size(); ++j)
          deltas.push_back(
              json{{"a", values[i].first},
                   {"b", values[j].first},
                   {"delta", std::abs(values[i].second - values[j].second)},
                   {"estimate_sum", estimates[i] + estimates[j]}});
      out["methods"] = methods;
      out["deltas"] = deltas;
      rr.out = out.dump() + "\n";
      return rr;
    }

    rr.err = json{{"error",
                   {{"field", "subcommand"}, {"message", "none selected"}}}}
                 .dump() + "\n";
    rr.exit_code = 1;
    return rr;
  } catch (const FieldError& e) {
    rr.err = json{{"error", {{"field", e.field}, {"message", e.message}}}}
                 .dump() + "\n";
    rr.exit_code = 1;
  } catch (const region_error& e) {
    rr.err = json{{"error", {{"field", "region"}, {"message", e.what()}}}}
                 .dump() + "\n";
    rr.exit_code = 2;
  } catch (const budget_error& e) {
    rr.err = json{{"error",
                   {{"field", "budget"},
                    {"message", e.what()},
                    {"value", cplx_json(e.value)},
                    {"error_estimate", e.estimate}}}}
                 .dump() + "\n";
    rr.exit_code = 3;
  } catch (const unsupported_error& e) {
    rr.err = json{{"error", {{"field", "rank"}, {"message", e.what()}}}}
                 .dump() + "\n";
    rr.exit_code = 1;
  } catch (const std::invalid_argument& e) {
    rr.err = json{{"error", {{"field", "argument"}, {"message", e.what()}}}}
                 .dump() + "\n";
    rr.exit_code = 1;
  }
  return rr;
}

} // namespace mdl::cli
