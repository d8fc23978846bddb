//! Jump-coefficient Poisson scalability run: ILU(0) vs accelerated ILU(0).
//! Stops at `||r||^2 / ||b||^2 <= 1e-18`; the residual columns are `||Re||`.
//!
//! `cargo run --release -p a2ilu-core --example scalability -- 10 20 40`

use a2ilu::pipeline::{run, PipelineOptions};
use a2ilu::problems::gen_poisson_jump;
use a2ilu::{FactorizationConfig, Method, OptimizeOptions, SolverConfig};

fn main() -> a2ilu::Result<()> {
    let sizes: Vec<usize> = std::env::args()
        .skip(1)
        .map(|s| s.parse().expect("grid size"))
        .collect();
    let sizes = if sizes.is_empty() {
        vec![10, 20, 40, 80]
    } else {
        sizes
    };
    println!(
        "{:>5} {:>8} {:>8} {:>7} {:>7} {:>10} {:>10} {:>7}",
        "m", "ilu_it", "a2_it", "phi", "gamma", "|Re|_ilu", "|Re|_a2", "ratio"
    );
    for m in sizes {
        let (a, b) = gen_poisson_jump(m)?;
        let mut opts = PipelineOptions {
            factor: FactorizationConfig::ilu0(),
            accelerate: false,
            optimize: OptimizeOptions::default(),
            solver: SolverConfig::new(Method::Cg, 1e-18, 10 * m),
        };
        let base = run(&a, &b, true, &opts)?;
        opts.accelerate = true;
        let acc = run(&a, &b, true, &opts)?;
        println!(
            "{:>5} {:>8} {:>8} {:>7.3} {:>7.3} {:>10.3e} {:>10.3e} {:>7.3}",
            m,
            base.stats.iterations,
            acc.stats.iterations,
            acc.params.phi,
            acc.params.gamma,
            acc.f_baseline.sqrt(),
            acc.f_used.sqrt(),
            (acc.f_used / acc.f_baseline).sqrt()
        );
    }
    Ok(())
}
