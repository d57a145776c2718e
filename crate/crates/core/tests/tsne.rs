mod common;

use common::{silhouette, two_blobs};
use hybridsent::eval::{render_svg, tsne, TsneConfig};
use hybridsent::Exec;

fn small_cfg() -> TsneConfig {
    TsneConfig {
        perplexity: 10.0,
        ..TsneConfig::default()
    }
}

#[test]
fn separates_blobs_and_lowers_kl() {
    let (pts, labels) = two_blobs(80, 10, 2.0, 3);
    let out = tsne(&pts, &small_cfg(), Exec::Parallel).unwrap();
    assert!(out.entropy_errors.iter().all(|&e| e < 1e-4));
    assert!(out.final_kl < out.initial_kl);
    assert!(silhouette(&out.coords, &labels) > 0.5);
    let mean = out.coords.iter().fold([0.0, 0.0], |m, c| [m[0] + c[0], m[1] + c[1]]);
    assert!(mean[0].abs() < 1e-9 && mean[1].abs() < 1e-9);
}

#[test]
fn executors_give_identical_layouts() {
    let (pts, _) = two_blobs(50, 6, 1.0, 4);
    let cfg = TsneConfig {
        iterations: 100,
        ..small_cfg()
    };
    assert_eq!(
        tsne(&pts, &cfg, Exec::Sequential).unwrap(),
        tsne(&pts, &cfg, Exec::Parallel).unwrap()
    );
}

#[test]
fn plot_has_one_marker_per_point() {
    let (pts, labels) = two_blobs(40, 4, 2.0, 5);
    let cfg = TsneConfig {
        iterations: 50,
        ..small_cfg()
    };
    let out = tsne(&pts, &cfg, Exec::Sequential).unwrap();
    let svg = render_svg(&out.coords, &labels, Some("blobs")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 40);
    assert!(svg.contains("positive") && svg.contains("negative"));
}
