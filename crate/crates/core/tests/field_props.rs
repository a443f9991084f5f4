use proptest::prelude::*;

use sparse_recovery::ffield::{find_irreducible, interpolate, ExtField, GfField, Poly};

fn width() -> impl Strategy<Value = u8> {
    prop_oneof![1u8..=16, 17u8..=32]
}

proptest! {
    #[test]
    fn field_axioms(w in width(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let f = GfField::get(w).unwrap();
        let (a, b, c) = (a & f.mask(), b & f.mask(), c & f.mask());
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
        prop_assert_eq!(f.mul(a, 1), a);
        if a != 0 {
            let inv = f.inv(a).unwrap();
            prop_assert_eq!(f.mul(a, inv), 1);
            prop_assert_eq!(f.div(f.mul(a, b), a), Some(b));
        } else {
            prop_assert!(f.inv(0).is_none());
        }
    }

    #[test]
    fn table_and_clmul_paths_agree(w in 1u8..=16, a in any::<u32>(), b in any::<u32>()) {
        let f = GfField::get(w).unwrap();
        let (a, b) = (a & f.mask(), b & f.mask());
        prop_assert_eq!(f.mul_table(a, b), f.mul_clmul(a, b));
    }

    #[test]
    fn fermat(w in 1u8..=24, a in any::<u32>()) {
        let f = GfField::get(w).unwrap();
        let a = a & f.mask();
        prop_assert_eq!(f.pow(a, f.size()), a);
    }

    #[test]
    fn division_identity(
        a in prop::collection::vec(0u32..256, 0..12),
        b in prop::collection::vec(0u32..256, 1..6),
    ) {
        let f = GfField::get(8).unwrap();
        let a = Poly::from_coeffs(f, a);
        let b = Poly::from_coeffs(f, b);
        prop_assume!(!b.is_zero());
        let (q, r) = a.divrem(&b).unwrap();
        prop_assert_eq!(q.mul(&b).add(&r), a);
        if let Some(dr) = r.degree() {
            prop_assert!(dr < b.degree().unwrap());
        }
    }

    #[test]
    fn interpolation_round_trip(coeffs in prop::collection::vec(0u32..1024, 1..10), shift in 0u32..900) {
        let f = GfField::get(10).unwrap();
        let p = Poly::from_coeffs(f, coeffs.clone());
        let xs: Vec<u32> = (0..coeffs.len() as u32).map(|x| x + shift).collect();
        let ys: Vec<u32> = xs.iter().map(|&x| p.eval(x)).collect();
        prop_assert_eq!(interpolate(f, &xs, &ys).unwrap(), p);
    }

    #[test]
    fn extension_field_inverse(e in 2usize..4, seed in 0u64..50, idx in any::<u64>()) {
        let modulus = find_irreducible(8, e, seed).unwrap();
        let k = ExtField::new(&modulus).unwrap();
        let idx = idx & ((1u64 << (8 * e)) - 1);
        let a = k.from_index(idx);
        prop_assert_eq!(k.to_index(&a), idx);
        if idx != 0 {
            let inv = k.inv(&a).unwrap();
            prop_assert_eq!(k.mul(&a, &inv), k.one());
        }
    }
}

#[test]
fn reduction_polynomials_match_readme_table() {
    use sparse_recovery::ffield::reduction_poly;
    let table: [u64; 32] = [
        0x2, 0x7, 0xb, 0x13, 0x25, 0x43, 0x83, 0x11b, 0x203, 0x409, 0x805, 0x1009, 0x201b, 0x4021, 0x8003, 0x1002b,
        0x20009, 0x40009, 0x80027, 0x100009, 0x200005, 0x400003, 0x800021, 0x100001b, 0x2000009, 0x400001b,
        0x8000027, 0x10000003, 0x20000005, 0x40000003, 0x80000009, 0x10000008d,
    ];
    for (i, &p) in table.iter().enumerate() {
        assert_eq!(reduction_poly(i as u8 + 1), p, "w = {}", i + 1);
    }
}
