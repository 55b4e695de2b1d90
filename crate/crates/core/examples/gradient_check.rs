//! Analytic logit gradients against central finite differences.

use affectsynth::{
    decode_soft, init_logit_grid, relaxed_loss_and_grad, similarity_loss, softmax_grid, Codebook, LogitGrid,
    RelaxationMode, ScorerBackend, ToyScorer,
};

fn main() -> affectsynth::Result<()> {
    let cb = Codebook::toy(4, 8, 4, 0.05, 1)?;
    let scorer = ToyScorer::default();
    let pe = scorer.embed_text("An angry landscape")?;
    let logits = init_logit_grid(2, 2, 4, 1.0, 0)?;
    let (loss, grad) = relaxed_loss_and_grad(&logits, &cb, &scorer, &pe, RelaxationMode::Soft, 0)?;
    println!("loss {loss:.6}");

    let loss_at = |values: Vec<f64>| -> affectsynth::Result<f64> {
        let img = decode_soft(&softmax_grid(&LogitGrid::new(2, 2, 4, values)?)?, &cb)?;
        Ok(similarity_loss(&scorer.embed_image(&img)?, &pe))
    };
    let h = 1e-5;
    for i in 0..logits.as_slice().len() {
        let mut plus = logits.as_slice().to_vec();
        let mut minus = plus.clone();
        plus[i] += h;
        minus[i] -= h;
        let fd = (loss_at(plus)? - loss_at(minus)?) / (2.0 * h);
        println!("logit {i:>2}: analytic {:+.8e}  numeric {fd:+.8e}", grad[i]);
    }
    Ok(())
}
