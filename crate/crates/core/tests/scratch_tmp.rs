use loxodromic::*;
use loxodromic::verify::*;
use rand::SeedableRng;
#[test]
fn scratch() {
    let g = MoebiusMap::new(Complex::new(2.0001,0.0),Complex::new(-1.0,0.0),Complex::new(1.0,0.0),Complex::new(0.0,0.0)).unwrap();
    let t = std::time::Instant::now();
    let sc = Scenario::new(&g, 1e-9, 2.0, None).unwrap();
    println!("scenario {:?} n_disks={} r={} eps={:?}", t.elapsed(), sc.avoided.base.n_disks, sc.r, sc.eps_bound);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for _ in 0..3 { let z = sc.sample_outside(&mut rng); println!("outside {z} {:?}", t.elapsed()); }
    for _ in 0..3 { let z = sc.sample_transit(&mut rng); println!("transit {z} {:?}", t.elapsed()); }
    println!("{:?}", sc.sample_br(&mut rng));
}
