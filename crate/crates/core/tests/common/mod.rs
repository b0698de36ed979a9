#![allow(dead_code)]

use permtri::numtheory::gcd;
use rand::Rng;

/// A random Niho-type trinomial: distinct nonzero residues `k (2^m - 1) + e`.
pub fn random_niho_trinomial<R: Rng>(rng: &mut R, m: u32) -> [u64; 3] {
    let s = (1u64 << m) - 1;
    let q_circle = (1u64 << m) + 1;
    loop {
        let e = rng.random_range(0..s);
        let d = [(); 3].map(|_| rng.random_range(0..q_circle) * s + e);
        if d.contains(&0) || d[0] == d[1] || d[0] == d[2] || d[1] == d[2] {
            continue;
        }
        return d;
    }
}

/// Same, restricted to trinomials with an exponent coprime to `q - 1`.
pub fn random_applicable_niho<R: Rng>(rng: &mut R, m: u32) -> [u64; 3] {
    let q_minus_1 = (1u64 << (2 * m)) - 1;
    loop {
        let d = random_niho_trinomial(rng, m);
        if d.iter().any(|&x| gcd(x, q_minus_1) == 1) {
            return d;
        }
    }
}
