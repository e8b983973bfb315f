use fairfront::frontier::{solve_boxed_lp, BoxedLp};

fn main() {
    // min 0.1 + a.f  subject to  0.35 <= 0.1 + b.f <= 0.6,  0 <= f <= 1
    let lp = BoxedLp {
        a: vec![-0.3, -0.1, 0.2, 0.05],
        b: vec![0.2, -0.1, 0.3, 0.15],
        objective_offset: 0.1,
        k_offset: 0.1,
        lo: 0.35,
        hi: 0.6,
    };
    let sol = solve_boxed_lp(&lp);
    println!("status      {}", sol.status.as_str());
    println!("f           {:?}", sol.f.values());
    println!("objective   {:.6}", sol.objective);
    println!("constraint  {:.6}", lp.constraint_at(sol.f.values()));
    println!("multiplier  {:.6}", sol.dual_lambda);
    println!("dual value  {:.6}", lp.dual_value(sol.dual_lambda));
    println!("fractional  {:?}", sol.fractional_index);

    let impossible = BoxedLp { lo: 0.9, ..lp };
    println!("tighter bound: {}", solve_boxed_lp(&impossible).status.as_str());
}
