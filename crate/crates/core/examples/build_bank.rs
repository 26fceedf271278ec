use zetafield::experiments::{GinibreBank, GINIBRE_BANK_N, GINIBRE_BANK_REPS, GINIBRE_BANK_SEED};

fn main() {
    let path = std::env::var("ZETAFIELD_BANK_CACHE").unwrap_or_else(|_| "/tmp/zetafield_bank.bin".into());
    let t0 = std::time::Instant::now();
    let bank = GinibreBank::materialize(GINIBRE_BANK_N, GINIBRE_BANK_REPS, GINIBRE_BANK_SEED).unwrap();
    bank.save(std::path::Path::new(&path)).unwrap();
    println!(
        "built {} configs (n={}) in {:.0}s -> {}",
        bank.configs.len(),
        bank.n,
        t0.elapsed().as_secs_f64(),
        path
    );
}
