use hpicone::hcalc::{GridFunction, HGrid};
use hpicone::solver::{lambda1, lambda1_oracle_p2, solve_linear_p2, SolverConfig};
use std::time::Instant;

fn main() {
    for &m in &[9usize, 11, 17] {
        let grid = HGrid::unit_box(1, m).unwrap();
        let a = GridFunction::constant(grid.clone(), 0.0);
        let config = SolverConfig { p: 2.0, residual_tol: Some(1e-9), max_iterations: 50_000, keep_history: false, ..Default::default() };
        let t = Instant::now();
        let (lam, _) = lambda1(&a, 2.0, &config, &grid).unwrap();
        let t_descent = t.elapsed();
        if m <= 11 {
            let t = Instant::now();
            let oracle = lambda1_oracle_p2(&grid, None).unwrap();
            println!("m={m}: descent lambda1={lam:.8} ({t_descent:.2?}), oracle={oracle:.8} ({:.2?}), rel dev={:.2e}",
                t.elapsed(), (lam-oracle).abs()/oracle.abs());
            let t = Instant::now();
            let u = solve_linear_p2(&grid, &GridFunction::constant(grid.clone(), 1.0)).unwrap();
            println!("   direct solve in {:.2?}, sup={:.5e}", t.elapsed(), u.sup_norm());
        } else {
            println!("m={m}: descent lambda1={lam:.8} ({t_descent:.2?})");
        }
        // p=2.5 eigen
        let t = Instant::now();
        let config25 = SolverConfig { p: 2.5, residual_tol: Some(1e-8), max_iterations: 50_000, keep_history: false, ..Default::default() };
        let (lam25, _) = lambda1(&a, 2.5, &config25, &grid).unwrap();
        println!("   p=2.5 lambda1={lam25:.8} in {:.2?}", t.elapsed());
    }
}
