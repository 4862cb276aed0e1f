//! Compares the analytic gradient of the composite classifier loss with
//! central finite differences, parameter by parameter.
//!
//! ```text
//! cargo run --example gradient_check -- [alpha]
//! ```

use disentangle::models::{build_mlp_classifier, composite_gradients, Objective};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-6;

fn main() -> disentangle::Result<()> {
    let alpha: f64 = std::env::args().nth(1).map_or(100.0, |s| s.parse().expect("alpha"));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let x = Array2::from_shape_fn((6, 5), |_| rng.random_range(-1.0..1.0));
    let labels = [0, 1, 2, 0, 1, 2];
    let mut net = build_mlp_classifier::<f64>(5, &[7, 6], 3, 1)?;
    let taps = net.taps().to_vec();
    let t = 0.7;

    let (loss, grads) = composite_gradients(&net, x.view(), Some(&labels), Objective::Classify, &taps, alpha, t)?;
    println!(
        "loss {:.6} = ce {:.6} + {alpha} x snnl {:?}",
        loss.total(),
        loss.primary,
        loss.snnl
    );
    let analytic: Vec<Vec<f64>> = grads.tensors().into_iter().map(|g| g.to_vec()).collect();

    for (p, want) in analytic.iter().enumerate() {
        let mut worst = 0.0f64;
        for (i, &w) in want.iter().enumerate() {
            let mut eval = |delta: f64| {
                net.parameters_mut()[p][i] += delta;
                let (l, _) = composite_gradients(&net, x.view(), Some(&labels), Objective::Classify, &taps, alpha, t)
                    .expect("same shapes");
                net.parameters_mut()[p][i] -= delta;
                l.total()
            };
            let numeric = (eval(STEP) - eval(-STEP)) / (2.0 * STEP);
            worst = worst.max((numeric - w).abs() / w.abs().max(numeric.abs()).max(1e-6));
        }
        println!("tensor {p}: {} entries, worst relative error {worst:.2e}", want.len());
    }
    Ok(())
}
