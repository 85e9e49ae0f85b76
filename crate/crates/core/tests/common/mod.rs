#![allow(dead_code)]

use dvoretzky::density::Piece;
use dvoretzky::PiecewisePolyDensity;
use proptest::prelude::*;

/// Affine pieces on random breakpoints with endpoint values in `[lo, 3]`,
/// rescaled to unit mass. Values may jump at breakpoints.
pub fn density(lo: f64) -> impl Strategy<Value = PiecewisePolyDensity> {
    (1usize..6)
        .prop_flat_map(move |k| {
            (
                prop::collection::vec(0.02f64..0.98, k - 1),
                prop::collection::vec((lo..3.0, lo..3.0), k),
            )
        })
        .prop_map(|(mut cuts, values)| {
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            let mut edges = vec![0.0];
            edges.extend(cuts);
            edges.push(1.0);
            let pieces = edges
                .windows(2)
                .zip(&values)
                .map(|(w, &(v0, v1))| Piece {
                    from: w[0],
                    to: w[1],
                    c0: v0,
                    c1: (v1 - v0) / (w[1] - w[0]),
                })
                .collect();
            PiecewisePolyDensity::normalized(pieces, None).expect("positive mass")
        })
}
