//! Builds gasket levels for several N and writes one as JSON.
//!
//! cargo run --example mesh_export -- 3 4 mesh.json

use gasketvar::gasket::build_level;
use gasketvar::output::write_json;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(3, |s| s.parse().expect("N"));
    let m: u32 = args.get(1).map_or(3, |s| s.parse().expect("m"));

    println!("{:>3} {:>3} {:>9} {:>9} {:>9} {:>12}", "N", "m", "vertices", "edges", "cells", "edge length");
    for k in 0..=m {
        let l = build_level(n, k).unwrap();
        println!(
            "{n:>3} {k:>3} {:>9} {:>9} {:>9} {:>12.6}",
            l.num_vertices(),
            l.edges().len(),
            l.cells().len(),
            l.edge_length()
        );
    }
    if let Some(path) = args.get(2) {
        write_json(std::path::Path::new(path), &build_level(n, m).unwrap().export()).unwrap();
        println!("wrote {path}");
    }
}
