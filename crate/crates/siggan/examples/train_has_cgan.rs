//! Trains the hybrid (adversarial + spectral) variant for a few epochs and
//! writes a resumable checkpoint. Short run: the point is the mechanics and
//! the decreasing spectral component, not a converged generator.

use siggan::data::{synth_dataset, SurrogateSpec};
use siggan::gan::{read_checkpoint, train, write_checkpoint, GanHyperParams, GanModel, Variant};

fn main() -> siggan::Result<()> {
    let spec = SurrogateSpec {
        signal_len: 128,
        ..SurrogateSpec::default()
    };
    let ds = synth_dataset(&spec, 7)?;

    let mut hp = GanHyperParams::new(Variant::HasCgan, spec.signal_len)?;
    hp.epochs = 25;
    let mut model = GanModel::new(hp, 1)?;

    let log = train(&mut model, &ds, |st| {
        if (st.epoch + 1) % 5 == 0 {
            println!(
                "epoch {:3}  d_loss={:8.4}  g_loss={:8.4}  spectral={:8.4}",
                st.epoch + 1,
                st.d_loss,
                st.g_loss,
                st.spectral.unwrap_or(f64::NAN)
            );
        }
    })?;

    let first = log.epochs.first().and_then(|e| e.spectral).unwrap();
    let last = log.epochs.last().and_then(|e| e.spectral).unwrap();
    println!(
        "spectral component: epoch 1 = {first:.4}, epoch {} = {last:.4}",
        log.epochs.len()
    );

    let path = std::env::temp_dir().join("has_cgan_demo.sgf1");
    write_checkpoint(&path, &mut model, "demo run")?;
    let (reloaded, _) = read_checkpoint(&path)?;
    println!(
        "checkpoint {} round-trips: epochs_trained={}",
        path.display(),
        reloaded.epochs_trained
    );
    Ok(())
}
