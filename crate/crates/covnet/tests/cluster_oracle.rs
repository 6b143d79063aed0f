//! Monte Carlo validation of the helper stream generator and the cluster
//! statistics built on top of it.

use covnet::analytic::cluster_stats;
use covnet::sim::rng::{poisson_positions, stream};

const RHO: f64 = 0.005;
const RADIUS: f64 = 500.0;

#[test]
fn draw_count_matches_the_intensity() {
    let span = 2e7;
    let mut rng = stream(11, &[0]);
    let n = poisson_positions(RHO, span, &mut rng).len() as f64;
    let expect = RHO * span;
    assert!(
        (n - expect).abs() / expect < 0.01,
        "drew {n} positions, expected about {expect}"
    );
}

#[test]
fn gaps_pass_a_ks_test_against_the_exponential() {
    let mut rng = stream(12, &[0]);
    let pos = poisson_positions(RHO, 4e6, &mut rng);
    let mut gaps: Vec<f64> = pos.windows(2).map(|p| p[1] - p[0]).collect();
    gaps.truncate(15_000);
    let n = gaps.len() as f64;
    gaps.sort_by(f64::total_cmp);
    let mut d_stat: f64 = 0.0;
    for (i, g) in gaps.iter().enumerate() {
        let f = 1.0 - (-RHO * g).exp();
        let hi = (i as f64 + 1.0) / n - f;
        let lo = f - i as f64 / n;
        d_stat = d_stat.max(hi).max(lo);
    }
    // Stephens' modified statistic, 1% critical value.
    let modified = d_stat * (n.sqrt() + 0.12 + 0.11 / n.sqrt());
    assert!(modified < 1.628, "KS statistic {modified} rejects the exponential");
}

#[test]
fn cluster_geometry_matches_the_renewal_forms() {
    let span = 2e6;
    let threshold = 2.0 * RADIUS;
    let stats = cluster_stats(RHO, RADIUS, span).unwrap();
    let mut lens = Vec::new();
    let mut inter_gaps = Vec::new();
    let mut first_offsets = Vec::new();
    let mut complete_per_draw = Vec::new();
    for rep in 0..200u64 {
        let mut rng = stream(13, &[rep]);
        let pos = poisson_positions(RHO, span, &mut rng);
        first_offsets.push(pos[0]);
        // Split into maximal runs with consecutive spacing <= threshold.
        let mut clusters: Vec<(f64, f64)> = Vec::new();
        let mut start = pos[0];
        let mut prev = pos[0];
        for &p in &pos[1..] {
            if p - prev > threshold {
                clusters.push((start, prev));
                start = p;
            }
            prev = p;
        }
        clusters.push((start, prev));
        // Interior clusters only: the window edges truncate the outermost.
        if clusters.len() > 2 {
            for c in &clusters[1..clusters.len() - 1] {
                lens.push(c.1 - c.0);
            }
            for pair in clusters[1..clusters.len() - 1].windows(2) {
                inter_gaps.push(pair[1].0 - pair[0].1);
            }
            complete_per_draw.push((clusters.len() - 2) as f64);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mean_len = mean(&lens);
    let mean_gap = mean(&inter_gaps);
    let mean_first = mean(&first_offsets);
    let mean_count = mean(&complete_per_draw);
    let rel = |got: f64, want: f64| (got - want).abs() / want;
    assert!(
        rel(mean_len, stats.expected_cluster_len) < 0.03,
        "cluster length {mean_len} vs {}",
        stats.expected_cluster_len
    );
    assert!(
        rel(mean_gap, stats.expected_gap) < 0.02,
        "inter-cluster gap {mean_gap} vs {}",
        stats.expected_gap
    );
    assert!(
        rel(mean_first, stats.expected_first_offset) < 0.1,
        "first offset {mean_first} vs {}",
        stats.expected_first_offset
    );
    // Interior count under-reports the renewal count by about one cluster
    // (the two truncated edges), so compare with that slack.
    assert!(
        (mean_count - stats.expected_cluster_count).abs() < 2.0,
        "complete clusters per draw {mean_count} vs renewal {}",
        stats.expected_cluster_count
    );
}
