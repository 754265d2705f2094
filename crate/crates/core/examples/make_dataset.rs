//! Generates a planted clustered dataset as a DTF tensor plus a labels file.
//!
//! ```bash
//! cargo run --example make_dataset -- out/data.dtf out/labels.txt [seed]
//! ```

use rntd_core::io;
use rntd_core::synth::{clustered_tensor, ClusterSpec};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.len() < 3 {
        eprintln!("usage: make_dataset <data.dtf> <labels.txt> [seed]");
        std::process::exit(1);
    }
    let seed: u64 = args.get(3).map(|s| s.parse().expect("seed")).unwrap_or(7);

    let spec = ClusterSpec {
        sample_dims: vec![12, 12],
        ranks: vec![3, 3],
        clusters: 3,
        per_cluster: 30,
        cluster_contrast: 1.0,
        core_jitter: 0.05,
        seed,
    };
    let (x, labels) = clustered_tensor(&spec).expect("generation succeeds");

    if let Some(dir) = std::path::Path::new(&args[1]).parent() {
        std::fs::create_dir_all(dir).expect("output directory");
    }
    io::write_dtf_text(&args[1], &x).expect("write tensor");
    io::write_labels(&args[2], &labels).expect("write labels");
    println!(
        "wrote {:?} tensor to {} and {} labels to {}",
        x.shape(),
        args[1],
        labels.len(),
        args[2]
    );
}
