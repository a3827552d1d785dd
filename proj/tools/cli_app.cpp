#include "cli_app.hpp"

#include "adsvd/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <map>
#include <ostream>
#include <sstream>

namespace adsvd::cli {

namespace {

void add_model_options(CLI::App* sub, RunConfig& cfg) {
  bg::Params& p = cfg.params;
  sub->add_option("--input", cfg.input, "Frame directory (CDnet sequence root for eval)");
  sub->add_option("--init-count", cfg.init_count, "Number of initialization frames")
      ->capture_default_str();
  sub->add_option("--init-dir", cfg.init_dir, "Separate directory of initialization frames");
  sub->add_option("--init-span", cfg.init_span,
                  "Spread the init frames evenly over this many leading frames")
      ->capture_default_str();
  sub->add_option("--max-frames", cfg.max_frames, "Stop after this many frames (0 = all)")
      ->capture_default_str();
  sub->add_option("--ell", p.ell, "Rank kept after re-initialization")->capture_default_str();
  sub->add_option("--n-star", p.n_star, "Rank that triggers re-initialization")
      ->capture_default_str();
  sub->add_option("--eta", p.eta, "System size for the singular value bound")
      ->capture_default_str();
  sub->add_option("--tau-star-factor", p.tau_star_factor, "tau* as a multiple of rho")
      ->capture_default_str();
  sub->add_option("--beta", p.beta, "Frames per update block")->capture_default_str();
  sub->add_option("--nu", p.nu, "Partners per similarity check")->capture_default_str();
  sub->add_option("--delta-t", p.delta_t, "Summed time difference of the partners")
      ->capture_default_str();
  sub->add_option("--s-bar", p.s_bar, "Minimum mean similarity")->capture_default_str();
  sub->add_option("--theta", p.theta, "Foreground threshold in normalized units")
      ->capture_default_str();
  sub->add_option("--period", p.period, "Forced update every n blocks (0 = never)")
      ->capture_default_str();
  sub->add_option("--strategy", p.strategy, "Re-initialization strategy")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, bg::Strategy>{{"ii", bg::Strategy::kII},
                                              {"iii", bg::Strategy::kIII}},
          CLI::ignore_case))
      ->default_str("iii");
  sub->add_option("--mu", p.mu, "Background store size for strategy ii")
      ->capture_default_str();
  sub->add_option("--stride", p.stride, "Offer every n-th frame for an update")
      ->capture_default_str();
  sub->add_option("--similarity-check", p.similarity_check, "Temporal similarity gate")
      ->capture_default_str();
  sub->add_option("--downsample", cfg.downsample, "Box-filter window")->capture_default_str();
  sub->add_option("--morph-radius", cfg.morph_radius, "Closing disk radius (0 = off)")
      ->capture_default_str();
  sub->add_option("--min-blob", cfg.min_blob, "Smallest kept blob in pixels (0 = off)")
      ->capture_default_str();
  sub->add_option("--config", "Flat key = value file with any of these options");
}

// Rewrites `--config FILE` into the flags it holds, placed before the
// remaining arguments so that explicit flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::vector<std::string> from_file;
  std::size_t insert_at = std::string::npos;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string file;
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
    } else {
      out.push_back(args[i]);
      if (insert_at == std::string::npos && !args[i].empty() && args[i][0] != '-') {
        insert_at = out.size();  // just after the subcommand name
      }
      continue;
    }
    for (const auto& item : CLI::ConfigINI().from_file(file)) {
      if (item.name == "++" || item.name == "--") {
        continue;  // section markers
      }
      std::string name = item.name;
      std::replace(name.begin(), name.end(), '_', '-');
      from_file.push_back("--" + name);
      from_file.insert(from_file.end(), item.inputs.begin(), item.inputs.end());
    }
  }
  if (from_file.empty()) {
    return out;
  }
  const auto pos = insert_at == std::string::npos ? out.size() : insert_at;
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), from_file.begin(),
             from_file.end());
  return out;
}

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    out.push_back(std::stoi(tok));
  }
  return out;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app("Streaming background subtraction with an adaptive incremental SVD",
               "adsvd");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  RunConfig run_cfg;
  auto* run = app.add_subcommand("run", "Subtract the background of a frame directory");
  add_model_options(run, run_cfg);
  run->add_option("--out-masks", run_cfg.out_masks, "Directory for bin%06d.png masks");
  run->add_option("--out-foreground", run_cfg.out_foreground,
                  "Directory for masked input frames");
  run->add_option("--out-background", run_cfg.out_background,
                  "Directory for background estimates");
  run->add_option("--out-summary", run_cfg.out_summary, "Run summary file");

  EvalConfig eval_cfg;
  auto* eval = app.add_subcommand("eval", "Score a CDnet sequence");
  add_model_options(eval, eval_cfg.run);
  eval->add_option("--out-masks", eval_cfg.run.out_masks, "Directory for bin%06d.png masks");
  eval->add_option("--out-metrics", eval_cfg.out_metrics, "Metrics file");
  eval->add_option("--masks", eval_cfg.masks,
                   "Score existing bin%06d.png masks instead of running the model");

  TimingConfig timing_cfg;
  std::string sizes = "1,2,4,8,16";
  std::string synthetic;
  auto* timing = app.add_subcommand("timing", "Append and re-init time per image size");
  add_model_options(timing, timing_cfg.run);
  timing->add_option("--sizes", sizes, "Comma-separated pixel-count divisors")
      ->capture_default_str();
  timing->add_option("--frames", timing_cfg.frames, "Frames per size")->capture_default_str();
  timing->add_option("--synthetic", synthetic, "Use a synthetic WIDTHxHEIGHT scene");
  timing->add_option("--out-timing", timing_cfg.out_timing, "Timing table file");

  try {
    std::vector<std::string> expanded = expand_config(args);
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (run->parsed()) {
      if (run_cfg.input.empty()) {
        err << "error: --input is required\n";
        return 2;
      }
      const RunSummary s = cmd_run(run_cfg, err);
      write_summary(out, s);
    } else if (eval->parsed()) {
      if (eval_cfg.run.input.empty()) {
        err << "error: --input is required\n";
        return 2;
      }
      const EvalResult r = cmd_eval(eval_cfg, err);
      post::write_metrics(out, r.metrics, r.counts);
      out << "frames: " << r.evaluated << '\n';
    } else if (timing->parsed()) {
      timing_cfg.divisors = parse_sizes(sizes);
      if (!synthetic.empty()) {
        const auto x = synthetic.find('x');
        if (x == std::string::npos) {
          err << "error: --synthetic expects WIDTHxHEIGHT\n";
          return 2;
        }
        timing_cfg.synthetic_width = std::stoi(synthetic.substr(0, x));
        timing_cfg.synthetic_height = std::stoi(synthetic.substr(x + 1));
      }
      write_timing(out, cmd_timing(timing_cfg, err));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace adsvd::cli
