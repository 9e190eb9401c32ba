use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Lattice, Suite, TrialConfig, WeightScheme};
use crate::io::Instance;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// The random instance for trial `trial`; a pure function of
/// `(cfg, trial)`, independent of which thread asks.
///
/// Functions are named `f`, `g` and (for `lemma31` and `thm32`) `h`. For
/// those two suites `g` has mean exactly zero; about half the time its
/// support is first restricted to a random subset so that `G = supp g` is a
/// proper subset of the space. For `lemma31`, `f` takes values in
/// `{−1,0,1}` and `h` in `[−1,1]`.
pub fn generate_instance(cfg: &TrialConfig, trial: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial);
    let n = cfg.atoms.atoms_for(trial);
    let equal = match cfg.weights {
        WeightScheme::Equal => true,
        WeightScheme::RandomRational => false,
        WeightScheme::Mixed => trial % 2 == 0,
    };
    let weights = if equal {
        vec![q(1, n as i64); n]
    } else {
        let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=64)).collect();
        let total: i64 = raw.iter().sum();
        raw.iter().map(|&k| q(k, total)).collect()
    };
    let lattice = cfg.lattice;
    let draw = |rng: &mut ChaCha8Rng| lattice_values(rng, &lattice, n);
    let instance = Instance::new(weights.clone());
    match cfg.suite {
        Suite::Lemma31 => {
            let f = (0..n).map(|_| q(rng.gen_range(-1..=1), 1)).collect();
            let g = draw(&mut rng);
            let g = restrict_and_center(&mut rng, g, &weights);
            let d = lattice.denominator;
            let h = (0..n).map(|_| q(rng.gen_range(-d..=d), d)).collect();
            instance.with("f", f).with("g", g).with("h", h)
        }
        Suite::Thm32 => {
            let f = draw(&mut rng);
            let g = draw(&mut rng);
            let h = draw(&mut rng);
            let g = restrict_and_center(&mut rng, g, &weights);
            instance.with("f", f).with("g", g).with("h", h)
        }
        Suite::Thm41 | Suite::Thm43 | Suite::Rearrange => {
            let f = draw(&mut rng);
            let g = draw(&mut rng);
            instance.with("f", f).with("g", g)
        }
    }
}

fn lattice_values(rng: &mut ChaCha8Rng, lattice: &Lattice, n: usize) -> Vec<BigRational> {
    (0..n).map(|_| q(rng.gen_range(lattice.lo..=lattice.hi), lattice.denominator)).collect()
}

/// With probability 1/2 zeroes `g` off a random subset of at least two
/// atoms; then subtracts the mean over the remaining support so the result
/// integrates to exactly zero.
fn restrict_and_center(rng: &mut ChaCha8Rng, mut g: Vec<BigRational>, weights: &[BigRational]) -> Vec<BigRational> {
    let n = g.len();
    let mut keep = vec![true; n];
    if rng.gen_bool(0.5) {
        let subset: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        if subset.iter().filter(|&&k| k).count() >= 2 {
            keep = subset;
        }
    }
    let mut mass = BigRational::zero();
    let mut total = BigRational::zero();
    for i in 0..n {
        if keep[i] {
            mass += &weights[i];
            total += &g[i] * &weights[i];
        } else {
            g[i] = BigRational::zero();
        }
    }
    let mean = total / mass;
    for i in 0..n {
        if keep[i] {
            g[i] -= &mean;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::config::AtomRange;

    fn integral(values: &[BigRational], weights: &[BigRational]) -> BigRational {
        values.iter().zip(weights).map(|(v, w)| v * w).sum()
    }

    #[test]
    fn deterministic_in_seed_and_index() {
        let cfg = TrialConfig::new(Suite::Thm32).with_seed(11);
        assert_eq!(generate_instance(&cfg, 5), generate_instance(&cfg, 5));
        assert_ne!(generate_instance(&cfg, 5), generate_instance(&cfg, 6));
        assert_ne!(generate_instance(&cfg, 5), generate_instance(&cfg.clone().with_seed(12), 5));
    }

    #[test]
    fn centering_and_lattice_contracts() {
        for suite in [Suite::Thm32, Suite::Lemma31] {
            let cfg = TrialConfig::new(suite).with_weights(WeightScheme::Mixed).with_atoms(AtomRange { min: 1, max: 7 });
            for i in 0..400 {
                let inst = generate_instance(&cfg, i);
                assert!(integral(&inst.functions["g"], &inst.weights).is_zero());
                assert_eq!(inst.weights.iter().sum::<BigRational>(), q(1, 1));
                if suite == Suite::Lemma31 {
                    assert!(inst.functions["f"].iter().all(|v| [q(-1, 1), q(0, 1), q(1, 1)].contains(v)));
                    assert!(inst.functions["h"].iter().all(|v| *v >= q(-1, 1) && *v <= q(1, 1)));
                }
            }
        }
    }

    #[test]
    fn restricted_supports_occur() {
        let cfg = TrialConfig::new(Suite::Thm32).with_atoms(AtomRange::single(6));
        let proper = (0..200)
            .filter(|&i| generate_instance(&cfg, i).functions["g"].iter().any(|v| v.is_zero()))
            .count();
        assert!(proper > 40, "{proper}");
    }
}
