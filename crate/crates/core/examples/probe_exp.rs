use fracpois::experiments::*;
use fracpois::processes::MarginalPmf;
use fracpois::rates::RateFunction;
use fracpois::StabilityIndex;

fn main() {
    let lin = RateFunction::linear(1.0).unwrap();
    for a in [0.7, 0.9, 0.99] {
        let pmf = MarginalPmf::new(StabilityIndex::new(a).unwrap(), &lin, 1.0);
        match pmf {
            Ok(p) => match p.pmf(0) {
                Ok(v) => println!("alpha={a}: pmf(0) = {v}"),
                Err(e) => println!("alpha={a}: pmf error: {e}"),
            },
            Err(e) => println!("alpha={a}: grid error: {e}"),
        }
    }
    for seed in 0..20u64 {
        let r = clt_experiment(StabilityIndex::new(0.9).unwrap(), &lin, &[1.0, 10.0, 100.0], 10_000, seed, 0.03).unwrap();
        let ks: Vec<f64> = r.per_time.iter().map(|x| x.ks).collect();
        if !ks.windows(2).all(|w| w[1] <= w[0]) {
            println!("seed {seed} broke: {ks:?}");
        }
    }
    println!("clt {{1,10,100}} scan done");
}
