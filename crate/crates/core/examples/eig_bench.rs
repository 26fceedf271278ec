use rand::{Rng, SeedableRng};
use zetafield::linalg::complex_eigenvalues;
use zetafield::Complex64;

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for &n in &[400usize, 625, 900] {
        let t0 = std::time::Instant::now();
        let reps = 3;
        for _ in 0..reps {
            let mut a: Vec<Complex64> = (0..n * n)
                .map(|_| {
                    let re: f64 = rng.sample(rand_distr::StandardNormal);
                    let im: f64 = rng.sample(rand_distr::StandardNormal);
                    Complex64::new(re * 0.707, im * 0.707)
                })
                .collect();
            let ev = complex_eigenvalues(&mut a, n).unwrap();
            assert_eq!(ev.len(), n);
        }
        println!("n={n}: {:.3} s/decomposition", t0.elapsed().as_secs_f64() / reps as f64);
    }
}
