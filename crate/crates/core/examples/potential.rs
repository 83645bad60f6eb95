//! Validate the quadratic prototype and a tabulated potential against the
//! structural hypotheses (W(0) = 0, W' > 0, convexity).

use glvortex::potential::PotentialSpec;

fn main() -> Result<(), glvortex::error::Error> {
    let quad = PotentialSpec::quadratic();
    report(&quad);

    // W(t) = t²/2 + t⁴/12, sampled on [-1, 1].
    let t: Vec<f64> = (0..=200).map(|k| -1.0 + k as f64 / 100.0).collect();
    let w = t.iter().map(|t| 0.5 * t * t + t.powi(4) / 12.0).collect();
    let wp = t.iter().map(|t| t + t.powi(3) / 3.0).collect();
    let table = PotentialSpec::tabulated(t, w, wp, true)?;
    report(&table);

    let linear = PotentialSpec::analytic("linear", |t| t, |_| 1.0, |_| 0.0, false);
    report(&linear);
    Ok(())
}

fn report(spec: &PotentialSpec) {
    let v = spec.validate(1001);
    println!("{}: W'(1) = {:.6}, all hypotheses hold: {}", spec.name(), spec.wp_at_one(), v.all_passed());
    for c in &v.checks {
        println!("  {:?}: {} (witness {:?})", c.hypothesis, c.passed, c.witness);
    }
}
