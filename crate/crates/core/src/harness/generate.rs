//! Seeded instance generators. Every generator is a pure function of its
//! arguments: the same seed always yields a byte-identical file.
//!
//! Weights and values are small integers or multiples of 0.5, so sums of them
//! are exact in floating point.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::instance::{ElementSpec, InstanceFile, Payload, PositionSpec, TableEntry};
use crate::error::{Error, Result};
use crate::kset::{KSet, KSetSpace};
use crate::oracle::verify::is_nonmonotone_ksubmodular;
use crate::oracle::{CoverageOracle, UtilityOracle, TABLE_BUDGET};

fn elements(rng: &mut ChaCha8Rng, n: usize) -> Vec<ElementSpec> {
    (0..n)
        .map(|x| ElementSpec {
            name: format!("e{x}"),
            weight: rng.gen_range(1..=8) as f64,
        })
        .collect()
}

fn universe_weights(rng: &mut ChaCha8Rng, size: usize) -> Vec<f64> {
    (0..size).map(|_| rng.gen_range(1..=4) as f64).collect()
}

fn cover(rng: &mut ChaCha8Rng, universe_size: usize, density: f64) -> Vec<usize> {
    (0..universe_size)
        .filter(|_| rng.gen_bool(density))
        .collect()
}

fn check_shape(n: usize, k: usize, universe_size: usize, density: f64) -> Result<()> {
    if n == 0 || k == 0 || universe_size == 0 {
        return Err(Error::config(
            "n, k and the universe size must be at least 1",
        ));
    }
    if k > u8::MAX as usize {
        return Err(Error::config(format!("k = {k} exceeds {}", u8::MAX)));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::config(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }
    Ok(())
}

/// Weighted coverage: each `(x, i)` covers every universe item independently
/// with probability `density`.
pub fn generate_coverage(
    seed: u64,
    n: usize,
    k: usize,
    universe_size: usize,
    density: f64,
) -> Result<InstanceFile> {
    check_shape(n, k, universe_size, density)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elements = elements(&mut rng, n);
    let universe_weights = universe_weights(&mut rng, universe_size);
    let covers = (0..n)
        .map(|_| {
            (0..k)
                .map(|_| cover(&mut rng, universe_size, density))
                .collect()
        })
        .collect();
    Ok(InstanceFile {
        k,
        n,
        declared_monotone: Some(true),
        elements,
        payload: Payload::Coverage {
            universe_weights,
            covers,
        },
    })
}

/// Sum of `k` independent weighted coverage functions, one per position.
pub fn generate_separable(
    seed: u64,
    n: usize,
    k: usize,
    universe_size: usize,
    density: f64,
) -> Result<InstanceFile> {
    check_shape(n, k, universe_size, density)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elements = elements(&mut rng, n);
    let positions = (0..k)
        .map(|_| PositionSpec {
            universe_weights: universe_weights(&mut rng, universe_size),
            covers: (0..n)
                .map(|_| cover(&mut rng, universe_size, density))
                .collect(),
        })
        .collect();
    Ok(InstanceFile {
        k,
        n,
        declared_monotone: Some(true),
        elements,
        payload: Payload::Separable { positions },
    })
}

/// One candidate table: a random coverage function plus a per-`(x, i)` offset.
/// Each element gets at most one negative offset `-c`; its other positions get
/// offsets `≥ c`, so every pair of offsets for the same element sums to `≥ 0`.
fn propose(rng: &mut ChaCha8Rng, n: usize, k: usize, space: &KSetSpace) -> Result<Vec<f64>> {
    let universe = 2 * n;
    let covers = (0..n)
        .map(|_| (0..k).map(|_| cover(rng, universe, 0.4)).collect())
        .collect();
    let coverage = CoverageOracle::new(k, universe_weights(rng, universe), covers)?;
    let offsets: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut row = vec![0.0; k];
            if rng.gen_bool(0.6) {
                let c = rng.gen_range(1..=4) as f64 * 0.5;
                let negative = rng.gen_range(0..k);
                for (i, o) in row.iter_mut().enumerate() {
                    *o = if i == negative {
                        -c
                    } else {
                        c + rng.gen_range(0..=2) as f64 * 0.5
                    };
                }
            }
            row
        })
        .collect();
    let mut values = Vec::with_capacity(space.count());
    let mut assignment = vec![0u8; n];
    for idx in 0..space.count() {
        space.decode_into(idx, &mut assignment);
        let s = KSet::from_assignment(k, &assignment)?;
        let offset: f64 = s
            .pairs()
            .map(|(x, i)| offsets[x.index()][i.index() - 1])
            .sum();
        values.push(coverage.value(&s) + offset);
    }
    Ok(values)
}

/// Rejection-samples a table that is non-negative, normalized, k-submodular
/// (including orthant submodularity and pairwise monotonicity) and not
/// monotone. Fails with [`Error::GenerationExhausted`] after `max_attempts`
/// rejected candidates.
pub fn generate_nonmonotone_tabular(
    seed: u64,
    n: usize,
    k: usize,
    max_attempts: usize,
) -> Result<InstanceFile> {
    if n == 0 || k == 0 {
        return Err(Error::config("n and k must be at least 1"));
    }
    if k > u8::MAX as usize {
        return Err(Error::config(format!("k = {k} exceeds {}", u8::MAX)));
    }
    let space = KSetSpace::new(n, k, TABLE_BUDGET)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elements = elements(&mut rng, n);
    for _ in 0..max_attempts {
        let values = propose(&mut rng, n, k, &space)?;
        if values.iter().any(|&v| v < 0.0) {
            continue;
        }
        let table = crate::oracle::TabularOracle::new(n, k, values)?;
        if !is_nonmonotone_ksubmodular(&table, n, k)? {
            continue;
        }
        let entries = table
            .values()
            .iter()
            .enumerate()
            .map(|(idx, &value)| TableEntry {
                positions: space.decode(idx),
                value,
            })
            .collect();
        return Ok(InstanceFile {
            k,
            n,
            declared_monotone: Some(false),
            elements,
            payload: Payload::Tabular { entries },
        });
    }
    Err(Error::GenerationExhausted {
        attempts: max_attempts,
        reason: format!(
            "no non-negative, non-monotone k-submodular table found for n = {n}, k = {k}"
        ),
    })
}

/// A uniformly random stream order, seeded.
pub fn permutation(seed: u64, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kset::{ElementId, Position};
    use crate::oracle::eval;
    use crate::oracle::verify::{verify_monotone, verify_structure};

    #[test]
    fn coverage_is_deterministic() {
        let a = generate_coverage(7, 4, 2, 6, 0.5).unwrap().to_json();
        let b = generate_coverage(7, 4, 2, 6, 0.5).unwrap().to_json();
        assert_eq!(a, b);
        assert_ne!(a, generate_coverage(8, 4, 2, 6, 0.5).unwrap().to_json());
    }

    #[test]
    fn full_density_covers_everything() {
        let file = generate_coverage(1, 3, 2, 5, 1.0).unwrap();
        let Payload::Coverage {
            universe_weights, ..
        } = &file.payload
        else {
            unreachable!()
        };
        let total: f64 = universe_weights.iter().sum();
        let inst = file.build().unwrap();
        let s = KSet::from_pairs(2, [(ElementId(2), Position::new(2).unwrap())]).unwrap();
        assert_eq!(eval(&inst.oracle, &s).unwrap(), total);
    }

    #[test]
    fn generated_families_verify() {
        for file in [
            generate_coverage(3, 4, 2, 6, 0.4).unwrap(),
            generate_separable(3, 4, 2, 6, 0.4).unwrap(),
        ] {
            let inst = file.build().unwrap();
            let report = verify_structure(&inst.oracle, 4, 2).unwrap();
            assert!(report.reports().iter().all(|r| r.holds()));
        }
    }

    #[test]
    fn bad_density_is_rejected() {
        assert!(generate_coverage(0, 3, 2, 4, 0.0).is_err());
        assert!(generate_separable(0, 3, 2, 4, 1.5).is_err());
    }

    #[test]
    fn nonmonotone_tables() {
        let file = generate_nonmonotone_tabular(5, 4, 2, 1000).unwrap();
        assert_eq!(
            file.to_json(),
            generate_nonmonotone_tabular(5, 4, 2, 1000)
                .unwrap()
                .to_json()
        );
        let inst = file.build().unwrap();
        assert!(verify_structure(&inst.oracle, 4, 2)
            .unwrap()
            .is_ksubmodular());
        assert!(!verify_monotone(&inst.oracle, 4, 2).unwrap().holds());
    }

    #[test]
    fn single_element_single_position_is_exhausted() {
        assert!(matches!(
            generate_nonmonotone_tabular(0, 1, 1, 50).unwrap_err(),
            Error::GenerationExhausted { attempts: 50, .. }
        ));
    }

    #[test]
    fn permutations_are_seeded() {
        let p = permutation(4, 10);
        assert_eq!(p, permutation(4, 10));
        let mut sorted = p.clone();
        sorted.sort();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());
    }
}
