//! Soft nearest neighbor loss on a tiny batch: how it reacts to class
//! geometry and temperature, and what its gradient looks like.
//!
//! ```text
//! cargo run --example snnl_basics
//! ```

use disentangle::snnl::{pairwise_cosine_distance, snnl_forward, snnl_loss_and_gradient, SnnlBatch};
use ndarray::array;

fn main() -> disentangle::Result<()> {
    let x = array![[1.0, 0.0], [0.9, 0.1], [0.0, 1.0], [0.1, 0.9]];
    println!("cosine distances:\n{:.4}", pairwise_cosine_distance(x.view())?);

    // Same points, two labelings: one follows the geometry, one fights it.
    for (name, labels) in [("aligned", [0, 0, 1, 1]), ("crossed", [0, 1, 0, 1])] {
        for t in [1.0, 0.1] {
            let out = snnl_forward(&SnnlBatch::new(x.view(), &labels, t)?)?;
            println!("{name:>8} labels, T={t:<4} loss {:.6}", out.loss);
        }
    }

    let labels = [0, 0, 1, 1];
    let (out, grad) = snnl_loss_and_gradient(&SnnlBatch::new(x.view(), &labels, 1.0)?)?;
    println!("loss {:.6}, gradient:\n{:.5}", out.loss, grad);

    let single = snnl_forward(&SnnlBatch::new(x.view(), &[3, 3, 3, 3], 1.0)?)?;
    println!("one class: loss {}", single.loss);
    let lonely = snnl_forward(&SnnlBatch::new(x.view(), &[0, 1, 2, 3], 1.0)?)?;
    println!(
        "no shared classes: loss {:.3}, all isolated: {}",
        lonely.loss,
        lonely.all_isolated(4)
    );
    Ok(())
}
