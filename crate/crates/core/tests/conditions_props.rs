use proptest::prelude::*;
use toda_forge_core::conditions::{
    check_existence_condition, check_lt_condition, check_troyanov, generate_assumption_d, layout_beta_from_d,
    summarize, SingularityData,
};
use toda_forge_core::rational::{int, ratio, Rational};
use toda_forge_core::{Family, LieAlgebraType};

/// Rationals in `(0, 1)`, small denominators often so that boundaries get hit.
fn open_unit() -> impl Strategy<Value = Rational> {
    prop_oneof![
        (2i64..=12).prop_flat_map(|q| (1..q).prop_map(move |p| ratio(p, q))),
        (1i64..1000).prop_map(|p| ratio(p, 1000)),
    ]
}

/// Rationals in `[0, 1)`.
fn half_open_unit() -> impl Strategy<Value = Rational> {
    prop_oneof![Just(int(0)), open_unit()]
}

fn algebra() -> impl Strategy<Value = LieAlgebraType> {
    prop_oneof![
        (1usize..=5).prop_map(|n| LieAlgebraType::a(n).unwrap()),
        (2usize..=4).prop_map(|n| LieAlgebraType::new(Family::B, n).unwrap()),
        (2usize..=4).prop_map(|n| LieAlgebraType::new(Family::C, n).unwrap()),
        Just(LieAlgebraType::new(Family::D, 4).unwrap()),
        Just(LieAlgebraType::new(Family::G, 2).unwrap()),
        Just(LieAlgebraType::new(Family::F, 4).unwrap()),
    ]
}

fn beta_matrix(n: usize, m: usize) -> impl Strategy<Value = Vec<Vec<Rational>>> {
    prop::collection::vec(prop::collection::vec(half_open_unit(), m), n)
}

proptest! {
    #[test]
    fn scalar_condition_is_troyanov(gamma in prop::collection::vec(open_unit(), 1..=8)) {
        let data = SingularityData::from_beta(vec![gamma.clone()]).unwrap();
        let existence = check_existence_condition(&data, LieAlgebraType::a(1).unwrap()).unwrap();
        let troyanov = check_troyanov(&gamma).unwrap();
        prop_assert!(troyanov.forms_agree);
        prop_assert_eq!(existence.verdict, troyanov.verdict);
    }

    #[test]
    fn cell_forms_agree((alg, beta) in algebra().prop_flat_map(|a| (Just(a), (1usize..=5).prop_flat_map(move |m| beta_matrix(a.rank(), m))))) {
        let data = SingularityData::from_beta(beta).unwrap();
        let report = check_existence_condition(&data, alg).unwrap();
        prop_assert!(report.forms_agree);
    }

    #[test]
    fn beta_bar_is_affine(
        (alg, b0, b1) in algebra().prop_flat_map(|a| (1usize..=4).prop_flat_map(move |m| (Just(a), beta_matrix(a.rank(), m), beta_matrix(a.rank(), m)))),
        t in open_unit(),
    ) {
        let mix: Vec<Vec<Rational>> = b0
            .iter()
            .zip(&b1)
            .map(|(r0, r1)| r0.iter().zip(r1).map(|(x, y)| &t * x + (int(1) - &t) * y).collect())
            .collect();
        let s0 = summarize(&SingularityData::from_beta(b0).unwrap(), alg).unwrap();
        let s1 = summarize(&SingularityData::from_beta(b1).unwrap(), alg).unwrap();
        let sm = summarize(&SingularityData::from_beta(mix).unwrap(), alg).unwrap();
        for i in 0..alg.rank() {
            prop_assert_eq!(&sm.beta_bar[i], &(&t * &s0.beta_bar[i] + (int(1) - &t) * &s1.beta_bar[i]));
        }
    }

    #[test]
    fn assumption_d_family(n in 2usize..=6, k in 1i64..=50) {
        // epsilon = k / (51 * 400 n^2) stays below the (d4) bound
        let eps = ratio(k, 51 * 400 * (n * n) as i64);
        let params = generate_assumption_d(n, &eps).unwrap();
        prop_assert!(params.consequences().all());
        let data = layout_beta_from_d(&params);
        prop_assert_eq!(data.num_points(), 3 * n + 1);
        let alg = LieAlgebraType::a(n).unwrap();
        let summary = summarize(&data, alg).unwrap();
        for i in 1..=n {
            prop_assert_eq!(&summary.beta_total[i - 1], &params.b()[4 * i]);
        }
        prop_assert!(check_lt_condition(&data).verdict);
        prop_assert!(!check_existence_condition(&data, alg).unwrap().verdict);
    }
}

#[test]
fn troyanov_boundaries_are_strict() {
    let half = ratio(1, 2);
    let at_two = vec![half.clone(); 4];
    assert!(!check_troyanov(&at_two).unwrap().verdict);
    let pairwise_tie = vec![half.clone(), ratio(1, 4), ratio(1, 4)];
    assert!(!check_troyanov(&pairwise_tie).unwrap().verdict);
    let data = SingularityData::from_beta(vec![pairwise_tie]).unwrap();
    assert!(!check_existence_condition(&data, LieAlgebraType::a(1).unwrap()).unwrap().verdict);
}

#[test]
fn epsilon_at_the_bound_is_rejected() {
    assert!(generate_assumption_d(2, &ratio(1, 1600)).is_err());
    assert!(generate_assumption_d(2, &ratio(1, 1601)).is_ok());
}
