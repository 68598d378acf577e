//! The KS map, its exact form, and the circle of preimages over a point.
//!
//! ```text
//! cargo run --example ks_map_and_fibers
//! ```

use kslift::geometry::{fiber, ks_map, ks_map_exact, DoublePolar};
use kslift::rational::ratio;

fn main() {
    let y = [ratio(1, 2), ratio(-1, 3), ratio(2, 5), ratio(1, 1)];
    let x = ks_map_exact(&y);
    let shown: Vec<String> = x.iter().map(|q| q.to_string()).collect();
    println!("K(1/2, -1/3, 2/5, 1) = ({})", shown.join(", "));

    let target = [0.3, -1.2, 0.8];
    let f = fiber(&target);
    println!("fiber over {target:?}: r1 = {:.6}, r2 = {:.6}, phase {:?}", f.r1, f.r2, f.phase);
    for (i, y) in f.points(6).iter().enumerate() {
        let back = ks_map(y);
        let polar = DoublePolar::from_point(y);
        println!(
            "  point {i}: |y| = {:.12}, theta1 - theta2 = {:+.6}, K(y) = [{:.12}, {:.12}, {:.12}]",
            y.iter().map(|t| t * t).sum::<f64>().sqrt(),
            (polar.theta1 - polar.theta2).rem_euclid(std::f64::consts::TAU),
            back[0],
            back[1],
            back[2]
        );
    }

    for axis in [[2.0, 0.0, 0.0], [-2.0, 0.0, 0.0], [0.0, 0.0, 0.0]] {
        println!("fiber over {axis:?}: {}", serde_json::to_string(&fiber(&axis)).unwrap());
    }
}
