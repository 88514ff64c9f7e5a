use std::collections::HashMap;

use finitekey::gf2::*;
use finitekey::Probability;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn nested(n: usize, t: usize, s: usize, seed: u64) -> (BinaryCode, BinaryCode) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c1 = sample_subcode(n, t, &mut rng).unwrap();
    let c2 = sample_extension(&c1, s, &mut rng).unwrap();
    (c1, c2)
}

fn all_vectors(n: usize) -> impl Iterator<Item = BitVec> {
    (0..1u64 << n).map(move |i| BitVec::from_index(n, i))
}

#[test]
fn full_rank_sampler_is_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws = 10_000;
    let mut counts: HashMap<String, u64> = HashMap::new();
    for _ in 0..draws {
        let m = sample_full_rank_matrix(2, 3, &mut rng).unwrap();
        *counts.entry(m.to_text()).or_default() += 1;
    }
    // 7 nonzero first rows times 6 independent second rows.
    assert_eq!(counts.len(), 42);
    let q = 1.0 / 42.0;
    let sd = (draws as f64 * q * (1.0 - q)).sqrt();
    for (m, &c) in &counts {
        assert!((c as f64 - draws as f64 * q).abs() < 4.0 * sd, "{m}: {c}");
    }
}

#[test]
fn full_rank_sampler_postcondition() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        assert_eq!(rank(&sample_full_rank_matrix(8, 16, &mut rng).unwrap()), 8);
    }
    assert_eq!(sample_full_rank_matrix(1, 1, &mut rng).unwrap().to_text(), "1\n");
}

#[test]
fn subcode_membership_frequencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (m, s) in [(3usize, 1usize), (4, 2), (5, 2)] {
        let target = BitVec::unit(m, 0);
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| sample_subcode(m, s, &mut rng).unwrap().contains(&target))
            .count();
        let q = ((1u64 << s) - 1) as f64 / ((1u64 << m) - 1) as f64;
        let sd = (draws as f64 * q * (1.0 - q)).sqrt();
        assert!((hits as f64 - draws as f64 * q).abs() < 4.0 * sd, "({m}, {s}): {hits}");
    }
}

#[test]
fn coset_leaders_have_minimum_weight() {
    for n in 1..=10usize {
        for dim in 0..=n {
            let mut rng = ChaCha8Rng::seed_from_u64((n * 31 + dim) as u64);
            let code = sample_subcode(n, dim, &mut rng).unwrap();
            let leaders = CosetLeaders::new(&code).unwrap();
            let words = code.codewords().unwrap();
            for y in all_vectors(n) {
                let g = leaders.leader(&y);
                assert!(code.contains(&g.xor(&y)));
                let best = words.iter().map(|c| (c.xor(&y)).weight()).min().unwrap();
                assert_eq!(g.weight(), best);
            }
        }
    }
}

#[test]
fn decoding_label_is_invariant_under_subcode_shifts() {
    for n in 2..=8usize {
        for (t, s) in [(0, 1), (1, 1), (1, 2), (2, 1)] {
            if t + s > n {
                continue;
            }
            let (c1, c2) = nested(n, t, s, (n * 7 + t * 3 + s) as u64);
            let shifts = c1.codewords().unwrap();
            for y in all_vectors(n) {
                let base = min_distance_decode(&y, &c1, &c2).unwrap();
                for x in &shifts {
                    assert_eq!(min_distance_decode(&y.xor(x), &c1, &c2).unwrap(), base);
                }
            }
        }
    }
}

#[test]
fn error_probability_does_not_depend_on_the_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 2..=8usize {
        let (c1, c2) = nested(n, 1.min(n - 1), 1, n as u64);
        let w = AdditiveChannel::random(n, &mut rng).unwrap();
        let expected = exact_error_probability(&w, &c1, &c2).unwrap().value();
        for x in c2.codewords().unwrap() {
            let mut correct = 0.0;
            for e in all_vectors(n) {
                let decoded = min_distance_decode(&x.xor(&e), &c1, &c2).unwrap();
                if decoded == c1.reduce(&x) {
                    correct += w.prob(&e);
                }
            }
            assert!((1.0 - correct - expected).abs() < 1e-12, "n = {n}");
        }
    }
}

#[test]
fn full_space_error_is_one_minus_zero_noise() {
    let w = AdditiveChannel::bsc(4, Probability::new(0.2).unwrap()).unwrap();
    let err = exact_error_probability(&w, &BinaryCode::zero(4), &BinaryCode::full(4)).unwrap();
    assert!((err.value() - (1.0 - 0.8f64.powi(4))).abs() < 1e-12);
    let none = exact_error_probability(&w, &BinaryCode::full(4), &BinaryCode::full(4)).unwrap();
    assert_eq!(none.value(), 0.0);
}

#[test]
fn hamming_code_structure() {
    let ham = BinaryCode::hamming74();
    let min = ham.codewords().unwrap().iter().filter(|c| !c.is_zero()).map(BitVec::weight).min();
    assert_eq!(min, Some(3));
    assert!(ham.dual().is_subcode_of(&ham));
    let dec = SyndromeDecoder::new(&ham).unwrap();
    for c in ham.codewords().unwrap() {
        for i in 0..7 {
            let mut y = c.clone();
            y.flip(i);
            assert_eq!(dec.decode(&y).unwrap(), c);
        }
    }
}

#[test]
fn text_round_trip() {
    let text = "# generator\n1100\n\n0011\n";
    let code = BinaryCode::from_text(text).unwrap();
    assert_eq!(code.to_text(), "1100\n0011\n");
    assert!(BinaryCode::from_text("1100\n1100\n").is_err());
    assert!(BinaryCode::from_text("10x\n").is_err());
    assert!(BinaryCode::from_text("\n# nothing\n").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rref_transform_reproduces_the_echelon_form(rows in 1usize..8, cols in 1usize..80, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = BitMatrix::from_rows(cols, (0..rows).map(|_| {
            let bits: Vec<bool> = (0..cols).map(|_| rand::Rng::random(&mut rng)).collect();
            BitVec::from_bits(&bits)
        }).collect()).unwrap();
        let e = m.rref();
        for i in 0..rows {
            let combo = m.left_mul(e.transform.row(i)).unwrap();
            prop_assert_eq!(&combo, e.reduced.row(i));
        }
        prop_assert_eq!(rank(&m), rank(&m.transpose()));
    }

    #[test]
    fn dual_is_orthogonal(n in 1usize..40, frac in 0.0f64..=1.0, seed: u64) {
        let dim = ((n as f64) * frac) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = sample_subcode(n, dim, &mut rng).unwrap();
        let dual = code.dual();
        prop_assert_eq!(dual.dim(), n - dim);
        for a in code.generator().rows() {
            for b in dual.generator().rows() {
                prop_assert!(!a.dot(b));
            }
        }
        prop_assert!(dual.dual() == code);
    }

    #[test]
    fn encode_and_recover(n in 1usize..100, frac in 0.0f64..=1.0, seed: u64) {
        let dim = ((n as f64) * frac) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = sample_subcode(n, dim, &mut rng).unwrap();
        let bits: Vec<bool> = (0..dim).map(|_| rand::Rng::random(&mut rng)).collect();
        let msg = BitVec::from_bits(&bits);
        let word = code.encode(&msg).unwrap();
        prop_assert!(code.contains(&word));
        prop_assert_eq!(code.message_of(&word), Some(msg));
        prop_assert_eq!(code.quotient_label(&word).weight(), 0);
        prop_assert_eq!(code.quotient_label(&word).len(), n - dim);
    }

    #[test]
    fn syndrome_and_exhaustive_decoders_agree(n in 2usize..12, frac in 0.0f64..=1.0, seed: u64) {
        let dim = ((n as f64) * frac) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = sample_subcode(n, dim, &mut rng).unwrap();
        let a = SyndromeDecoder::new(&code).unwrap();
        let b = ExhaustiveDecoder::new(&code).unwrap();
        for y in all_vectors(n) {
            prop_assert_eq!(a.decode(&y).unwrap(), b.decode(&y).unwrap());
        }
    }

    #[test]
    fn bitvec_text_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
        let v = BitVec::from_bits(&bits);
        let back: BitVec = v.to_string().parse().unwrap();
        prop_assert_eq!(&back, &v);
        let json = serde_json::to_string(&v).unwrap();
        prop_assert_eq!(serde_json::from_str::<BitVec>(&json).unwrap(), v);
    }
}
