//! The Fourier-domain training signal: mean squared STFT-magnitude gap
//! between a reference batch and a generated batch, with exact gradients.

use siggan::spectral::{spectral_loss, spectral_loss_grad, stft_magnitude, StftSpec};

fn tone(len: usize, period: f64) -> Vec<f64> {
    (0..len)
        .map(|t| (std::f64::consts::TAU * t as f64 / period).sin())
        .collect()
}

fn main() -> siggan::Result<()> {
    let spec = StftSpec::default();
    let len = 256;

    let reference = vec![tone(len, 16.0), tone(len, 24.0)];
    println!(
        "identity:        {:.3e}",
        spectral_loss(&reference, &reference, spec)?
    );

    let close = vec![tone(len, 17.0), tone(len, 25.0)];
    let far = vec![tone(len, 64.0), tone(len, 4.0)];
    println!(
        "nearby periods:  {:.3e}",
        spectral_loss(&reference, &close, spec)?
    );
    println!(
        "distant periods: {:.3e}",
        spectral_loss(&reference, &far, spec)?
    );

    let spectrogram = stft_magnitude(&reference[0], spec)?;
    println!(
        "\nstft of the first reference: {} frames x {} bins",
        spectrogram.n_frames(),
        spectrogram.n_bins()
    );

    // analytic gradient vs central finite difference at one sample
    let (loss, grads) = spectral_loss_grad(&reference, &far, spec)?;
    let mut plus = far.clone();
    let mut minus = far.clone();
    let h = 1e-6;
    plus[0][100] += h;
    minus[0][100] -= h;
    let fd = (spectral_loss(&reference, &plus, spec)? - spectral_loss(&reference, &minus, spec)?)
        / (2.0 * h);
    println!("\nloss = {loss:.6}");
    println!(
        "d loss / d generated[0][100]: analytic {:.8}, finite difference {fd:.8}",
        grads[0][100]
    );
    Ok(())
}
