//! Minimal end-to-end run on a 4-node hypergraph: diffuse two seed labels,
//! then print the L1-normalized embedding rows.
//!
//! ```sh
//! cargo run -p hyperdiff --example quickstart
//! ```

use hyperdiff::diffusion::{nonlinear_diffusion, DiffusionConfig};
use hyperdiff::hypergraph::{degree_data, Hypergraph};
use hyperdiff::operators::MixingFamily;
use hyperdiff::pipeline::{embedding_features, one_hot_labels, smoothed_input};

fn main() -> hyperdiff::Result<()> {
    let h = Hypergraph::from_edge_lists(4, &[vec![0, 1, 2], vec![2, 3]], None)?;
    let deg = degree_data(&h);
    let labels = [Some(0), None, None, Some(1)];
    let y = one_hot_labels(&labels, 2, &[0, 3])?;
    let u = smoothed_input(&y, None, 1e-6)?;
    let cfg = DiffusionConfig::new(0.6, MixingFamily::power_mean(2.0)?)?;
    let result = nonlinear_diffusion(&h, &deg, &u, &cfg)?;
    let features = embedding_features(&result.embedding);

    println!(
        "converged = {} after {} iterations (residual {:.3e})",
        result.converged,
        result.iterations,
        result.final_residual()
    );
    for i in 0..features.rows() {
        let row: Vec<String> = (0..features.cols())
            .map(|j| format!("{:.4}", features.get(i, j)))
            .collect();
        println!("node {i}: [{}]", row.join(", "));
    }
    Ok(())
}
