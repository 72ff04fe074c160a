//! Trains every adversarial variant briefly on the same data and compares
//! final losses and mean wavelet coherence against held-out signals.

use siggan::data::{synth_dataset, SurrogateSpec};
use siggan::gan::{generate_labeled, train, GanHyperParams, GanModel, Variant};
use siggan::spectral::{wavelet_coherence, CwtSpec};

fn main() -> siggan::Result<()> {
    let spec = SurrogateSpec {
        signal_len: 128,
        ..SurrogateSpec::default()
    };
    let ds = synth_dataset(&spec, 7)?;
    let cwt = CwtSpec::for_len(spec.signal_len, 20)?;

    println!("variant      d_loss    g_loss   mean_wc");
    for variant in Variant::ALL {
        let mut hp = GanHyperParams::new(variant, spec.signal_len)?;
        hp.epochs = 10;
        let mut model = GanModel::new(hp, 3)?;
        let log = train(&mut model, &ds, |_| {})?;
        let last = log.epochs.last().unwrap();

        // one generated signal per held-out label, compared to the real one
        let ra: Vec<f64> = ds.test.iter().map(|s| s.ra_um).collect();
        let (generated, _) = generate_labeled(&mut model, &ds, &ra, 1000)?;
        let mut wc_sum = 0.0;
        for (real, gen) in ds.test.iter().zip(&generated) {
            wc_sum += wavelet_coherence(&real.signal, &gen.signal, &cwt)?.mean_inside_coi();
        }
        let mean_wc = wc_sum / ds.test.len() as f64;

        println!(
            "{:<10} {:9.4} {:9.4} {:9.4}",
            variant.name(),
            last.d_loss,
            last.g_loss,
            mean_wc
        );
    }
    println!("\n(10 epochs each; coherence this early mostly reflects the noise prior)");
    Ok(())
}
