use zetafield::experiments::{self, ExpOptions, GinibreBank};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scale: f64 = std::env::var("PILOT_SCALE").ok().and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let names: Vec<&str> = if args.is_empty() {
        experiments::EXPERIMENTS.to_vec()
    } else {
        args.iter().map(|s| s.as_str()).collect()
    };
    let needs_bank = names.iter().any(|n| matches!(*n, "stationarity" | "v-pairing" | "cov-density-v"));
    let bank_reps = ((experiments::GINIBRE_BANK_REPS as f64 * scale) as usize).max(50);
    let bank = if needs_bank {
        let t0 = std::time::Instant::now();
        let b = GinibreBank::materialize(experiments::GINIBRE_BANK_N, bank_reps, experiments::GINIBRE_BANK_SEED).unwrap();
        eprintln!("[bank: {} configs in {:.1}s]", b.configs.len(), t0.elapsed().as_secs_f64());
        Some(b)
    } else { None };
    for name in names {
        let t0 = std::time::Instant::now();
        let opts = ExpOptions {
            n_reps: Some(((default_reps(name) as f64 * scale) as usize).max(50)),
            n_seeds: Some(((default_seeds(name) as f64 * scale) as usize).max(10)),
            ..Default::default()
        };
        match experiments::run_by_name(name, &opts, bank.as_ref()) {
            Ok(report) => {
                for line in report.summary_lines() {
                    println!("{line}");
                }
                eprintln!("[{name}: {:.1}s]", t0.elapsed().as_secs_f64());
            }
            Err(e) => println!("{name} ERROR: {e}"),
        }
    }
}

fn default_reps(name: &str) -> usize {
    match name {
        "psi1-divergence" => 6000,
        "hyperfluctuation" => 4000,
        _ => 2000,
    }
}
fn default_seeds(name: &str) -> usize {
    match name {
        "flux-identity" => 100,
        "lattice-periodicity" => 50,
        _ => 50,
    }
}
