use monoidring_core::algebra::{Coeff, Field, RingElem};
use monoidring_core::lattice::ExpVec;
use monoidring_core::matgroups::RingMatrix;
use monoidring_core::monoids::AffineMonoid;
use monoidring_core::descent::*;

fn mono(e: &[i64]) -> RingElem {
    RingElem::monomial(Field::Q, &ExpVec::from_ints(e, 2))
}

fn main() {
    let m = AffineMonoid::from_ints(&[&[2, 0], &[1, 1], &[0, 2]], 2).unwrap();
    let one = RingElem::one(Field::Q, 2, 2);
    let c2 = RingMatrix::from_entries(
        vec![
            one.add(&mono(&[1, 1])).unwrap(),
            mono(&[2, 0]).neg(),
            mono(&[0, 2]),
            one.sub(&mono(&[1, 1])).unwrap(),
        ],
        2,
    ).unwrap();
    let a = c2.stabilize(3).unwrap();
    let chain = FactorizerChain::standard();
    let config = DescentConfig::default();
    // manual: project to the first facet and try the sub-factorization
    let facets = m.cone().facets_of().unwrap();
    for f in &facets {
        println!("facet gens {:?}", f.generators());
        let proj = a.map_entries(|e| Ok(e.facet_projection(f))).unwrap();
        println!("proj identity: {}", proj.is_identity());
        if !proj.is_identity() {
            let sub = m.face_restrict(f).unwrap();
            println!("sub monoid gens {:?} rank {}", sub.generators(), sub.rank());
            match factorize(&sub, &proj, &chain, &config) {
                Ok(c) => println!("sub cert ok level {}", c.hull_level),
                Err(e) => println!("sub factorize error: {e}"),
            }
        }
    }
    let _ = Coeff::from_i64(Field::Q, 1);
}
