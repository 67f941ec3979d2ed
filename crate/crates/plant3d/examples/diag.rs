use plant3d::*;

fn blob_stats(n: usize) {
    let spec = SynthSpec {
        kind: SynthKind::Blob,
        n_points: n,
        size: 1.0,
        noise: 0.0,
        seed: 17,
        ..Default::default()
    };
    let cloud = synth_cloud(&spec).unwrap();
    let tree = KdTree::build(&cloud);
    let res = cloud_resolution(&cloud, &tree).unwrap();
    let c = cloud.centroid();
    let kps = detect_sift3d(&cloud, &tree, &SiftDetectorParams::default(), res).unwrap();
    let dmin = kps
        .iter()
        .map(|k| (k.position - c).norm())
        .fold(f64::INFINITY, f64::min);
    let near: Vec<f64> = kps
        .iter()
        .filter(|k| (k.position - c).norm() <= 3.0 * res.value())
        .map(|k| k.scale)
        .collect();
    println!(
        "blob n={n}: res={:.3} s/res={:.2} kp={} nearest-to-centroid={:.3} ({:.2}xres) near-scales={:?}",
        res.value(),
        1.0 / res.value(),
        kps.len(),
        dmin,
        dmin / res.value(),
        near
    );
}

fn main() {
    for n in [150, 200, 300, 400, 800] {
        blob_stats(n);
    }
}
