//! Builds the surrogate force-signal dataset and prints what is in it.

use siggan::bench::extract_features;
use siggan::data::{synth_dataset, SurrogateSpec};

fn main() -> siggan::Result<()> {
    let spec = SurrogateSpec::default();
    let ds = synth_dataset(&spec, 42)?;

    println!(
        "train={} test={} signal_len={} sample_rate={} Hz",
        ds.train.len(),
        ds.test.len(),
        ds.signal_len(),
        ds.sample_rate_hz
    );

    let (lo, hi) = ds
        .all()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.ra_um), hi.max(s.ra_um))
        });
    println!("roughness range: {lo:.4} .. {hi:.4} um");

    // label and signal amplitude are coupled by construction; show it
    println!("\n id    rpm   feed  depth     Ra     rms   centroid");
    for s in ds.train.iter().take(8) {
        let f = extract_features(&s.signal, ds.sample_rate_hz)?;
        println!(
            "{:3} {:6.0} {:6.0} {:6.1} {:7.4} {:7.4} {:9.1}",
            s.id,
            s.params.rpm,
            s.params.feed_mm_min,
            s.params.depth_um,
            s.ra_um,
            f.rms,
            f.spectral_centroid_hz
        );
    }

    let norm = ds.norm()?;
    println!(
        "\nnormalization: signal [{:.4},{:.4}] -> [-1,1], Ra [{:.4},{:.4}] -> [0,1]",
        norm.signal_min, norm.signal_max, norm.ra_min, norm.ra_max
    );
    Ok(())
}
