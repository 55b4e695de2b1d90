//! The first AdamW step against its closed form.
//!
//! After one step the bias-corrected moments equal `g` and `g²`, so the update
//! is `θ(1 − lr·wd) − lr·g/(|g| + ε)`.

use affectsynth::{adamw_step, AdamWConfig, AdamWState};

fn main() -> affectsynth::Result<()> {
    let cases = [(1.0, 2.0, 0.0), (1.0, 0.0, 0.1), (-0.5, -3.0, 0.01), (2.0, 1e-9, 0.0)];
    for (theta, g, wd) in cases {
        let cfg = AdamWConfig {
            learning_rate: 0.1,
            weight_decay: wd,
            ..AdamWConfig::default()
        };
        let mut params = [theta];
        adamw_step(&mut params, &[g], &mut AdamWState::new("theta", 1), &cfg)?;
        let closed = theta * (1.0 - cfg.learning_rate * wd) - cfg.learning_rate * g / (g.abs() + cfg.epsilon);
        println!(
            "θ={theta:>5} g={g:>6} wd={wd:<4} -> {:.12} (closed form {closed:.12})",
            params[0]
        );
    }

    // several steps on f(θ) = (θ − 3)²
    let cfg = AdamWConfig {
        learning_rate: 0.3,
        ..AdamWConfig::default()
    };
    let mut theta = [0.0];
    let mut state = AdamWState::new("theta", 1);
    for step in 1..=60 {
        let grad = [2.0 * (theta[0] - 3.0)];
        adamw_step(&mut theta, &grad, &mut state, &cfg)?;
        if step % 10 == 0 {
            println!("step {step:>2}: θ = {:.5}", theta[0]);
        }
    }
    Ok(())
}
