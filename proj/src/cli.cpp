#include "aqsketch/cli.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "aqsketch/diagnostics.hpp"
#include "aqsketch/errors.hpp"
#include "aqsketch/experiments.hpp"
#include "aqsketch/serialization.hpp"
#include "aqsketch/stream_reader.hpp"

namespace aqsketch::cli {

namespace {

std::string display_key(uint64_t key, key_kind kind) {
  if (kind == key_kind::u64) return std::to_string(key);
  std::ostringstream os;
  os << std::setprecision(17) << decode_f64_key(key);
  return os.str();
}

uint64_t parse_query_key(const std::string& text, key_kind kind) {
  if (kind == key_kind::u64) return std::stoull(text);
  const double v = std::stod(text);
  if (!is_valid_f64_key(v)) {
    throw std::invalid_argument("NaN is not a valid query key");
  }
  return encode_f64_key(v);
}

struct build_options {
  double eps = 0.1;
  double delta = 0.125;
  uint64_t seed = 1;
  uint32_t lazy = 1;
  std::string key_kind_name = "auto";
  std::string input;
  std::string format = "text";
  std::string output;
};

int cmd_build(const build_options& opt, std::ostream& out) {
  const stream_format fmt = parse_stream_format(opt.format);
  key_kind kind;
  if (opt.key_kind_name == "auto") {
    kind = fmt == stream_format::binary_f64le ? key_kind::f64 : key_kind::u64;
  } else if (opt.key_kind_name == "u64") {
    kind = key_kind::u64;
  } else if (opt.key_kind_name == "f64") {
    kind = key_kind::f64;
  } else {
    throw CLI::ValidationError("--key-kind must be auto, u64 or f64");
  }
  if ((fmt == stream_format::binary_f64le && kind != key_kind::f64) ||
      (fmt == stream_format::binary_u64le && kind != key_kind::u64)) {
    throw CLI::ValidationError("--key-kind conflicts with --format");
  }
  sketch_params params{opt.eps, opt.delta, kind, opt.lazy};
  sketch s = [&] {
    try {
      return sketch(params, opt.seed);
    } catch (const std::invalid_argument& e) {
      throw CLI::ValidationError(e.what());  // bad eps/delta is a usage error
    }
  }();

  std::ifstream in(opt.input, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input " + opt.input);
  read_stream(in, fmt, kind, [&](uint64_t key) { s.update(key); });

  save_file(s, opt.output);
  const memory_footprint_info fp = s.memory_footprint();
  out << "n_items " << s.item_count() << "\nlevels " << s.level_count()
      << "\nstored_items " << fp.stored_items << "\n";
  return exit_ok;
}

int cmd_merge(const std::string& a_path, const std::string& b_path,
              const std::string& out_path, std::ostream& out,
              std::ostream& err) {
  const sketch a = load_file(a_path);
  const sketch b = load_file(b_path);
  const sketch merged = sketch::merge(a, b);
  const invariant_report report = check_invariants(merged);
  if (!report.all_pass()) {
    err << "merged sketch failed invariant checks:\n" << report.summary();
    return exit_invariant;
  }
  save_file(merged, out_path);
  out << "n_items " << merged.item_count() << "\nlevels "
      << merged.level_count() << "\n";
  return exit_ok;
}

int cmd_query(const std::string& path, const std::vector<std::string>& ranks,
              const std::vector<double>& quantiles, std::ostream& out) {
  const sketch s = load_file(path);
  const query_snapshot snap = s.snapshot();
  const key_kind kind = s.params().kind;
  for (const std::string& text : ranks) {
    const uint64_t key = parse_query_key(text, kind);
    out << "rank " << text << ' ' << snap.rank(key) << '\n';
  }
  for (const double phi : quantiles) {
    out << "quantile " << phi << ' ' << display_key(snap.quantile(phi), kind)
        << '\n';
  }
  return exit_ok;
}

int cmd_check(const std::string& path, std::ostream& out) {
  const sketch s = load_file(path);
  const invariant_report report = check_invariants(s);
  out << report.summary();
  for (size_t h = 0; h < s.level_count(); ++h) {
    out << "phi level " << h << ": " << potential_value(s.levels()[h]) << '\n';
  }
  return report.all_pass() ? exit_ok : exit_invariant;
}

int cmd_experiment(const experiment_config& cfg, const std::string& kind,
                   const std::string& csv_path, std::ostream& out) {
  std::ofstream file;
  std::ostream* csv = &out;
  if (!csv_path.empty()) {
    file.open(csv_path);
    if (!file) throw std::runtime_error("cannot open " + csv_path);
    csv = &file;
  }
  if (kind == "error") {
    run_error_experiment(cfg, csv);
  } else if (kind == "space") {
    run_space_experiment(cfg, csv);
  } else if (kind == "merge-shape") {
    run_merge_shape_experiment(cfg, csv);
  } else if (kind == "potential") {
    run_potential_experiment(cfg, csv);
  } else {
    throw CLI::ValidationError(
        "--experiment must be error, space, merge-shape or potential");
  }
  return exit_ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"adaptive-compactor quantile sketches"};
  app.require_subcommand(1);

  build_options bopt;
  auto* build = app.add_subcommand("build", "stream a file into a new sketch");
  build->add_option("--eps", bopt.eps, "accuracy in (0,1)")->required();
  build->add_option("--delta", bopt.delta, "failure probability in (0,1/8]")
      ->required();
  build->add_option("--seed", bopt.seed, "rng seed");
  build->add_option("--input", bopt.input, "input path")->required();
  build->add_option("--format", bopt.format, "text | u64le | f64le");
  build->add_option("--key-kind", bopt.key_kind_name, "auto | u64 | f64");
  build->add_option("--lazy", bopt.lazy, "compaction trigger factor (1 or 2)");
  build->add_option("--output", bopt.output, "sketch file to write")
      ->required();

  std::string merge_a, merge_b, merge_out;
  auto* merge = app.add_subcommand("merge", "merge two sketch files");
  merge->add_option("a", merge_a, "first sketch")->required();
  merge->add_option("b", merge_b, "second sketch")->required();
  merge->add_option("--output", merge_out, "merged sketch file")->required();

  std::string query_path;
  std::vector<std::string> query_ranks;
  std::vector<double> query_quantiles;
  auto* query = app.add_subcommand("query", "rank/quantile queries");
  query->add_option("sketch", query_path, "sketch file")->required();
  query->add_option("--rank", query_ranks, "keys to rank");
  query->add_option("--quantile", query_quantiles, "fractions in [0,1]");

  std::string check_path;
  auto* check = app.add_subcommand("check", "run invariant diagnostics");
  check->add_option("sketch", check_path, "sketch file")->required();

  experiment_config cfg;
  std::string exp_kind, exp_dist = "uniform", exp_shape = "stream", csv_path;
  auto* exp = app.add_subcommand("experiment", "reproduction experiments");
  exp->add_option("--experiment", exp_kind,
                  "error | space | merge-shape | potential")
      ->required();
  exp->add_option("--eps", cfg.epsilon, "accuracy");
  exp->add_option("--delta", cfg.delta, "failure probability");
  exp->add_option("--n", cfg.n, "input size");
  exp->add_option("--dist", exp_dist,
                  "uniform | sorted-asc | sorted-desc | zipf | clustered");
  exp->add_option("--shape", exp_shape,
                  "stream | balanced | caterpillar | random");
  exp->add_option("--trials", cfg.trials, "independent trials");
  exp->add_option("--seed", cfg.seed, "base seed");
  exp->add_option("--lazy", cfg.lazy_factor, "compaction trigger factor");
  exp->add_option("--threads", cfg.threads, "worker threads (0 = auto)");
  exp->add_option("--rank-fraction", cfg.rank_fractions, "query rank fractions");
  exp->add_option("--absolute-rank", cfg.absolute_ranks, "query ranks");
  exp->add_flag("--fixed-data", cfg.fixed_data, "same input data in all trials");
  exp->add_option("--csv", csv_path, "write CSV here instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return exit_usage;
  }

  try {
    if (*build) return cmd_build(bopt, out);
    if (*merge) return cmd_merge(merge_a, merge_b, merge_out, out, err);
    if (*query) return cmd_query(query_path, query_ranks, query_quantiles, out);
    if (*check) return cmd_check(check_path, out);
    if (*exp) {
      try {
        cfg.dist = parse_input_dist(exp_dist);
        cfg.shape = parse_merge_shape(exp_shape);
        cfg.validate();
      } catch (const std::invalid_argument& e) {
        err << e.what() << '\n';
        return exit_usage;
      }
      return cmd_experiment(cfg, exp_kind, csv_path, out);
    }
  } catch (const CLI::ValidationError& e) {
    err << e.what() << '\n';
    return exit_usage;
  } catch (const invariant_error& e) {
    err << e.what() << '\n';
    return exit_invariant;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return exit_data;
  }
  return exit_usage;
}

}  // namespace aqsketch::cli
