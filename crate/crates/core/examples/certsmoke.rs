use steinweiss::certify::*;
use steinweiss::conditions::SwParams;
use steinweiss::functions::*;
use steinweiss::geometry::Geometry;
use steinweiss::scalar::Scalar;

fn main() {
    let opts = CertifyOptions { budget: 200_000, seed: 11, ..Default::default() };

    // lambda >= n, full space, n=1 lambda=1 -> log model
    let p = SwParams::new(Geometry::full_space(1).unwrap(), Scalar::from_int(2), Scalar::from_int(2),
        Scalar::zero(), Scalar::zero(), Scalar::from_int(1)).unwrap();
    let c = certify_lambda_range(&p, &schedules::deltas(), &opts).unwrap();
    println!("lggn n1 l1: verdict {:?} model {:?} fit {} pred {} sandwich {:?}",
        c.verdict, c.model, c.fitted_rate, c.predicted_rate, c.numeric.as_ref().map(|n| n.sandwich_ok));

    // n=2 lambda=3 -> power, slope -1
    let p2 = SwParams::new(Geometry::full_space(2).unwrap(), Scalar::from_int(2), Scalar::from_int(2),
        Scalar::ratio(1,4), Scalar::ratio(-1,8), Scalar::from_int(3)).unwrap();
    let c2 = certify_lambda_range(&p2, &schedules::deltas(), &opts).unwrap();
    println!("lggn n2 l3: verdict {:?} fit {} pred {} sandwich {:?}",
        c2.verdict, c2.fitted_rate, c2.predicted_rate, c2.numeric.as_ref().map(|n| n.sandwich_ok));

    // wrong regime
    let p3 = SwParams::new(Geometry::full_space(1).unwrap(), Scalar::from_int(2), Scalar::from_int(2),
        Scalar::zero(), Scalar::zero(), Scalar::ratio(1,2)).unwrap();
    println!("wrong regime: {:?}", certify_lambda_range(&p3, &schedules::deltas(), &opts).is_err());

    // weight range beta side: n=1, r=2 (q=2), beta=1/2 boundary -> log
    let pw = SwParams::new(Geometry::full_space(1).unwrap(), Scalar::from_int(2), Scalar::from_int(2),
        Scalar::zero(), Scalar::ratio(1,2), Scalar::ratio(1,4)).unwrap();
    let cw = certify_weight_range(&pw, WeightSide::Beta, &schedules::rhos(), &opts).unwrap();
    println!("beta bdry: verdict {:?} model {:?} fit {} pred {} sandwich {:?}",
        cw.verdict, cw.model, cw.fitted_rate, cw.predicted_rate, cw.numeric.as_ref().map(|n| n.sandwich_ok));

    // n=2, q=2, beta=3/2 -> power -1
    let pw2 = SwParams::new(Geometry::full_space(2).unwrap(), Scalar::from_int(2), Scalar::from_int(2),
        Scalar::zero(), Scalar::ratio(3,2), Scalar::ratio(1,4)).unwrap();
    let cw2 = certify_weight_range(&pw2, WeightSide::Beta, &schedules::rhos(), &opts).unwrap();
    println!("beta pow: verdict {:?} fit {} pred {} sandwich {:?}",
        cw2.verdict, cw2.fitted_rate, cw2.predicted_rate, cw2.numeric.as_ref().map(|n| n.sandwich_ok));

    // alpha side half space: n=2 => alpha threshold (n-1)/q_p = 1/2
    let ph = SwParams::new(Geometry::half_space(2).unwrap(), Scalar::from_int(2), Scalar::from_int(2),
        Scalar::from_int(1), Scalar::zero(), Scalar::ratio(1,2)).unwrap();
    let ch = certify_weight_range(&ph, WeightSide::Alpha, &schedules::rhos(), &opts).unwrap();
    println!("alpha half: verdict {:?} fit {} pred {} sandwich {:?}",
        ch.verdict, ch.fitted_rate, ch.predicted_rate, ch.numeric.as_ref().map(|n| n.sandwich_ok));

    // scaling: n=1, p=r=2, lambda=1/2, theta=-1/2 -> slope +1/2
    let ps = SwParams::new(Geometry::full_space(1).unwrap(), Scalar::from_int(2), Scalar::from_int(2),
        Scalar::zero(), Scalar::zero(), Scalar::ratio(1,2)).unwrap();
    let f = indicator_annulus(1, 0.0, 1.0).unwrap();
    let cs = verify_scaling_law(&ps, &f, &f, &schedules::scales(), &opts).unwrap();
    println!("scaling: verdict {:?} fit {} pred {}", cs.verdict, cs.fitted_rate, cs.predicted_rate);

    // balance holds -> theta=0, bounded at scale
    let pb = SwParams::new(Geometry::full_space(1).unwrap(), Scalar::from_int(2), Scalar::from_int(2),
        Scalar::zero(), Scalar::zero(), Scalar::from_int(1)).unwrap();
    let fb = indicator_annulus(1, 0.0, 1.0).unwrap();
    let gb = indicator_annulus(1, 2.0, 3.0).unwrap();
    let cb = verify_scaling_law(&pb, &fb, &gb, &schedules::scales(), &opts).unwrap();
    println!("scaling theta0: verdict {:?} fit {}", cb.verdict, cb.fitted_rate);

    // sum negative: full n=2, p=r=2, eps=0.05, alpha=-1 beta=0, lambda=1/2
    let pc = SwParams::new(Geometry::full_space(2).unwrap(), Scalar::from_int(2), Scalar::from_int(2),
        Scalar::from_int(-1), Scalar::zero(), Scalar::ratio(1,2)).unwrap();
    let cc = certify_sum_negative(&pc, 0.05, &[2,4,6,8,16,32], &opts).unwrap();
    println!("sumneg: verdict {:?} fit {} pred {} chain {:?} sandwich {:?}",
        cc.verdict, cc.fitted_rate, cc.predicted_rate, cc.chain_constant, cc.numeric.as_ref().map(|n| n.sandwich_ok));
    println!("  S_1 check: {} vs {}", cylinder_partial_sum(&pc, 0.25, 1), 2f64.powf(-0.5));

    // half-space sum negative, n=2, alpha=-0.6, beta=0.1, eps=0.05
    let pch = SwParams::new(Geometry::half_space(2).unwrap(), Scalar::from_int(2), Scalar::from_int(2),
        Scalar::ratio(-6,10), Scalar::ratio(1,10), Scalar::ratio(1,2)).unwrap();
    let cch = certify_sum_negative(&pch, 0.05, &[2,3,4,5,6], &opts).unwrap();
    println!("sumneg half: verdict {:?} sandwich {:?} numeric {:?}",
        cch.verdict, cch.numeric.as_ref().map(|n| n.sandwich_ok), cch.numeric.as_ref().map(|n| n.values.clone()));

    // hoelder: full n=2, p=r=4 (1/p+1/r = 1/2 < 1), balance lambda
    let lam = steinweiss::conditions::solve_balance_lambda(&Geometry::full_space(2).unwrap(),
        Scalar::from_int(4), Scalar::from_int(4), Scalar::zero(), Scalar::zero());
    println!("hoelder lambda: {}", lam);
    let phh = SwParams::new(Geometry::full_space(2).unwrap(), Scalar::from_int(4), Scalar::from_int(4),
        Scalar::zero(), Scalar::zero(), lam).unwrap();
    let chh = certify_hoelder(&phh, &schedules::radii(), &opts).unwrap();
    println!("hoelder: verdict {:?} fit {} pred {} residual {}",
        chh.verdict, chh.fitted_rate, chh.predicted_rate, hoelder_exponent_residual(&phh));

    // threshold: n=2,k=1,r=2, lambda=3/2 -> e*=1 log
    let pt = SwParams::new(Geometry::half_space(2).unwrap(), Scalar::from_int(2), Scalar::from_int(2),
        Scalar::zero(), Scalar::zero(), Scalar::ratio(3,2)).unwrap();
    println!("e* = {}", threshold_exponent(&pt));
    let ct = certify_lambda_threshold(&pt, &schedules::rhos(), &opts).unwrap();
    println!("thresh log: verdict {:?} model {:?} fit {} pred {} sandwich {:?}",
        ct.verdict, ct.model, ct.fitted_rate, ct.predicted_rate, ct.numeric.as_ref().map(|n| n.sandwich_ok));

    // n=3,k=1,r=2, lambda=3 -> e*=2 power 1
    let pt2 = SwParams::new(Geometry::codim(3, 1).unwrap(), Scalar::from_int(2), Scalar::from_int(2),
        Scalar::zero(), Scalar::zero(), Scalar::from_int(3)).unwrap();
    println!("e*2 = {}", threshold_exponent(&pt2));
    let ct2 = certify_lambda_threshold(&pt2, &schedules::rhos(), &opts).unwrap();
    println!("thresh pow: verdict {:?} fit {} pred {} sandwich {:?}",
        ct2.verdict, ct2.fitted_rate, ct2.predicted_rate, ct2.numeric.as_ref().map(|n| n.sandwich_ok));
}
