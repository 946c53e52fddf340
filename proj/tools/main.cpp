#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "sieve/run_store.hpp"

namespace {

void add_common(CLI::App* cmd, sieve::cli::CommonRunOptions& options, bool backend_required,
                bool templates_required) {
  cmd->add_option("--run", options.run_dir, "run directory")->required();
  auto* backend = cmd->add_option("--backend", options.backend_file, "backend config JSON");
  if (backend_required) backend->required();
  auto* templates =
      cmd->add_option("--templates", options.templates_dir, "prompt template directory");
  if (templates_required) templates->required();
  cmd->add_option("--parallel", options.parallel, "max in-flight backend calls")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--halt-after", options.halt_after,
                  "halt after this many record appends (testing aid)");
}

void add_curve(CLI::App* cmd, sieve::cli::CurveFlags& flags) {
  cmd->add_option("--metric", flags.metric, "verification, consistency, or both");
  cmd->add_option("--k-inf", flags.k_inf_grid, "response budgets to evaluate");
  cmd->add_option("--k-verif", flags.k_verif_grid, "verification budgets to evaluate");
  cmd->add_option("--seeds", flags.seeds, "subsample seeds");
  cmd->add_flag("--ambiguous", flags.ambiguous, "restrict to the ambiguous subset");
  cmd->add_option("--p-same", flags.p_same, "one-sidedness cutoff for omission");
  cmd->add_option("--draw", flags.draw, "draw size for the one-sidedness test");
  cmd->add_flag("--keep-consistency-correct", flags.keep_consistency_correct,
                "keep questions consistency already solves");
  cmd->add_option("--table", flags.table_file, "write the cell table here");
  cmd->add_option("--matrix", flags.matrix_file, "write seed-averaged matrices here");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"search, self-verification, and selection over model responses"};
  app.require_subcommand(1);

  sieve::cli::GenerateOptions generate;
  CLI::App* cmd = app.add_subcommand("generate", "sample candidate responses");
  add_common(cmd, generate, true, true);
  cmd->add_option("--questions", generate.questions_file, "questions JSONL file");
  cmd->add_option("--config", generate.config_file, "search config JSON");
  cmd->add_option("--seed", generate.seed, "run seed");
  cmd->add_flag("--no-extract-backend", generate.no_extract_backend,
                "extract final answers from \\boxed groups only");

  sieve::cli::VerifyOptions verify;
  cmd = app.add_subcommand("verify", "score responses by self-verification");
  add_common(cmd, verify, true, true);
  cmd->add_flag("--rewrite", verify.rewrite, "append the rewrite tail to each chain");

  sieve::cli::SelectOptions select;
  cmd = app.add_subcommand("select", "pick a response per question");
  add_common(cmd, select, false, false);
  cmd->add_option("--method", select.method, "verification or consistency");

  sieve::cli::GradeOptions grade;
  cmd = app.add_subcommand("grade", "grade responses against references");
  add_common(cmd, grade, false, false);
  cmd->add_option("--mode", grade.mode, "exact or lm");

  sieve::cli::ScaleOptions scale;
  cmd = app.add_subcommand("scale", "accuracy curves over subsampled budgets");
  cmd->add_option("--run", scale.run_dir, "run directory")->required();
  add_curve(cmd, scale.curve);

  sieve::cli::SimulateOptions simulate;
  cmd = app.add_subcommand("simulate", "draw and evaluate a synthetic run");
  cmd->add_option("--config", simulate.config_file, "synthetic config JSON")->required();
  cmd->add_option("--seed", simulate.seed, "master seed");
  cmd->add_option("--emit-run", simulate.emit_run_dir, "persist the drawn run here");
  add_curve(cmd, simulate.curve);
  cmd->add_flag("--trend", simulate.trend, "report rank-correlation trends");
  cmd->add_option("--permutations", simulate.permutations, "permutation test size")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--trend-seed", simulate.trend_seed, "permutation test seed");

  sieve::cli::BenchOptions bench;
  cmd = app.add_subcommand("bench", "verifier skill on labeled pairs and solutions");
  cmd->add_option("--entries", bench.entries_file, "benchmark entries JSONL")->required();
  cmd->add_option("--backend", bench.backend_file, "backend config JSON")->required();
  cmd->add_option("--templates", bench.templates_dir, "prompt template directory")->required();
  cmd->add_option("--out", bench.out_file, "write rows and summaries here");

  sieve::cli::CostOptions cost;
  cmd = app.add_subcommand("cost", "verification cost of one question");
  cmd->add_option("--k-inf", cost.k_inf, "responses per question");
  cmd->add_option("--k-verif", cost.k_verif, "verification attempts per response");
  cmd->add_option("--tokens-per-attempt", cost.tokens_per_attempt, "tokens per attempt");
  cmd->add_option("--price-per-million", cost.price_per_million, "dollars per 1M tokens");
  cmd->add_option("--reduction", cost.reduction, "fractional cost reduction");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("generate")) return sieve::cli::cmd_generate(generate);
    if (app.got_subcommand("verify")) return sieve::cli::cmd_verify(verify);
    if (app.got_subcommand("select")) return sieve::cli::cmd_select(select);
    if (app.got_subcommand("grade")) return sieve::cli::cmd_grade(grade);
    if (app.got_subcommand("scale")) return sieve::cli::cmd_scale(scale);
    if (app.got_subcommand("simulate")) return sieve::cli::cmd_simulate(simulate);
    if (app.got_subcommand("bench")) return sieve::cli::cmd_bench(bench);
    if (app.got_subcommand("cost")) return sieve::cli::cmd_cost(cost);
  } catch (const sieve::run_store::HaltRequested& e) {
    std::cerr << "halted: " << e.what() << '\n';
    return sieve::cli::kExitHalted;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sieve::cli::kExitError;
  }
  return sieve::cli::kExitOk;
}
