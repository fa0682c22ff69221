use clap::{Parser, Subcommand};
use std::path::PathBuf;

const COLUMN_REFERENCE: &str = "\
CSV columns per command (all floats carry 17 significant digits; every file
starts with a `# timestamp:` line that is excluded from the recorded hash):

  simulate-crofton          rep, hyperplanes, volume, u1, inradius, theta_r
  simulate-voronoi-typical  rep, points, r_o, R_o, theta_o, bisector_match
  tessellate                cell, vertices, area, perimeter, u1
  verify-urysohn            body_id, kind, lhs, lhs_se, rhs, rhs_se, verdict
  verify-stability          body_id, kind, lhs, lhs_se, rhs, rhs_se, verdict
  check-cell-count          gamma_s, n, mean_cells, stderr, target, rejections, pass
  check-typical-identity    f, gamma_s, n, lhs, lhs_se, rhs, rhs_se, pass
  check-voronoi-tail        a, gamma_s, n, successes, p_hat, wilson3_low,
                            wilson3_high, target, pass
  check-lower-bound         a, gamma_s, tau, rhs_exact, n, successes, p_hat,
                            stderr, pass
  estimate-rate             gamma_s, n, successes, p_hat, wilson_low,
                            wilson_high, ln_p_over_gamma, lower_bound_rhs,
                            lower_bound_ok, starved
  estimate-conditional      model, dev, a, epsilon, gamma_s, n,
                            conditioning_successes, joint_successes,
                            degenerate_bodies, p_hat, ci_low, ci_high, starved
  constants                 family, param1, param2, value

Exit codes: 0 success, 1 verification failure, 2 invalid configuration,
3 degeneracy budget exceeded.

The only recognised environment variable is SPHERTESS_THREADS (worker count;
0 or unset picks the automatic default).";

/// Spherical convex-geometry functionals and Poisson-driven random
/// tessellations, with a seeded Monte Carlo verification harness.
#[derive(Parser)]
#[command(name = "sphertess", version, about, after_long_help = COLUMN_REFERENCE)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one experiment described by a JSON config file.
    ///
    /// The config selects the command (`simulate-crofton`,
    /// `simulate-voronoi-typical`, `tessellate`, `verify-urysohn`,
    /// `verify-stability`, `check-cell-count`, `check-typical-identity`,
    /// `check-voronoi-tail`, `check-lower-bound`, `estimate-rate`,
    /// `estimate-conditional`, `constants`), its parameters, the seed, and
    /// the output prefix; artifacts are `<prefix>.rows.csv` and
    /// `<prefix>.summary.json` (plus `<prefix>.cells.json` for the
    /// simulation commands). See --help for the per-command CSV columns.
    Run {
        /// Path to the JSON experiment configuration.
        config: PathBuf,
    },
}

fn main() {
    sphertess::mc::init_threads_from_env();
    let args = Args::parse();
    let code = match args.command {
        Command::Run { config } => sphertess::cli::run_path(&config),
    };
    std::process::exit(code);
}
