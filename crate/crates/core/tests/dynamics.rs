use ccm_core::{
    build_floquet, fft_response, magnetization, reduced_density, sample_disorder, DisorderSpec,
    KickSpec, QutritState, TritString,
};

fn mean_bulk_entropy(g: f64, draws: u64, cycles: usize) -> f64 {
    let n = 8;
    let start = TritString::new(vec![0, 1, 2, 2, 0, 1, 1, 0]).unwrap();
    let mut total = 0.0;
    for inst in 0..draws {
        let p = sample_disorder(&DisorderSpec::numerics(41), n, inst).unwrap();
        let op = build_floquet(&p, &KickSpec::standard(g).unwrap()).unwrap();
        let mut psi = QutritState::basis(&start).unwrap();
        for _ in 0..cycles {
            op.apply_cycle(&mut psi).unwrap();
            total += reduced_density(&psi, &[4]).unwrap().entropy().unwrap();
        }
    }
    total / (draws as f64 * cycles as f64)
}

#[test]
fn entanglement_grows_faster_away_from_the_perfect_kick() {
    let weak = mean_bulk_entropy(0.6, 5, 12);
    let strong = mean_bulk_entropy(0.99, 5, 12);
    assert!(weak > 2.0 * strong, "g=0.6 {weak} vs g=0.99 {strong}");
}

#[test]
fn perfect_kick_response_lives_on_the_period_three_bins() {
    let n = 6;
    let t_len = 60;
    let p = sample_disorder(&DisorderSpec::numerics(8), n, 3).unwrap();
    let op = build_floquet(&p, &KickSpec::standard(1.0).unwrap()).unwrap();
    let mut psi = QutritState::basis(&TritString::new(vec![2, 0, 1, 1, 0, 2]).unwrap()).unwrap();
    let mut series = vec![Vec::new(); n];
    for _ in 0..t_len {
        op.apply_cycle(&mut psi).unwrap();
        for (site, s) in series.iter_mut().enumerate() {
            s.push(magnetization(&psi, site + 1).unwrap());
        }
    }
    for s in &series {
        let spec = fft_response(s).unwrap();
        let stray: f64 = spec
            .magnitudes
            .iter()
            .enumerate()
            .filter(|(k, _)| k % (t_len / 3) != 0)
            .map(|(_, m)| m * m)
            .sum();
        assert!(stray < 1e-10, "off-bin weight {stray}");
        assert!(spec.magnitudes[t_len / 3] > 0.1);
    }
}
