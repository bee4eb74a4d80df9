//! Arithmetic in GF(2^8) over the Rijndael polynomial `x^8 + x^4 + x^3 + x + 1`,
//! plus the tables derived from it: the S-box pair and the multiply-by-constant
//! tables used by the lookup-table MixColumns strategy.
//!
//! Everything here is computed, not transcribed. [`tables`] builds the shared
//! set once and checks `sbox[0x00] == 0x63` before handing it out.

use std::sync::OnceLock;

/// Low byte of the reduction polynomial (`0x11B` with the `x^8` term dropped).
pub const REDUCTION: u8 = 0x1B;

/// Constants appearing in the forward and inverse MixColumns matrices that
/// need a real multiplication (`01` is the identity).
pub const MIX_CONSTANTS: [u8; 6] = [0x02, 0x03, 0x09, 0x0B, 0x0D, 0x0E];

/// Multiplication by `{02}`.
#[inline(always)]
pub fn xtime(b: u8) -> u8 {
    // 0xFF when the high bit is set, 0x00 otherwise.
    let carry = 0u8.wrapping_sub(b >> 7);
    (b << 1) ^ (carry & REDUCTION)
}

/// [`xtime`] applied to each of the four bytes packed in `w`.
#[inline(always)]
pub fn xtime_packed(w: u32) -> u32 {
    let high = (w >> 7) & 0x0101_0101;
    ((w & 0x7F7F_7F7F) << 1) ^ (high * REDUCTION as u32)
}

/// Field product by shift-and-add.
///
/// Always runs all eight steps, so the amount of work does not depend on
/// either operand.
#[inline]
pub fn gf_mul(a: u8, b: u8) -> u8 {
    let mut acc = 0u8;
    let mut a = a;
    let mut b = b;
    for _ in 0..8 {
        acc ^= a & 0u8.wrapping_sub(b & 1);
        a = xtime(a);
        b >>= 1;
    }
    acc
}

/// Multiplicative inverse, with `0` mapped to itself.
///
/// Exhaustive search. Only called while building the S-box.
pub fn gf_inverse(b: u8) -> u8 {
    if b == 0 {
        return 0;
    }
    (1..=255u8)
        .find(|&v| gf_mul(b, v) == 1)
        .expect("every non-zero element of a field has an inverse")
}

/// The S-box affine map: bit `i` of the output is
/// `b[i] ^ b[i+4] ^ b[i+5] ^ b[i+6] ^ b[i+7] ^ c[i]` (indices mod 8, `c = 0x63`),
/// with bit 0 the least significant.
pub fn affine_transform(b: u8) -> u8 {
    let mut out = 0u8;
    for i in 0..8 {
        let bit = (b >> i)
            ^ (b >> ((i + 4) % 8))
            ^ (b >> ((i + 5) % 8))
            ^ (b >> ((i + 6) % 8))
            ^ (b >> ((i + 7) % 8))
            ^ (0x63 >> i);
        out |= (bit & 1) << i;
    }
    out
}

/// `entries[x] == constant · x` for every byte `x`.
#[derive(Clone, PartialEq, Eq)]
pub struct MulTable {
    constant: u8,
    entries: [u8; 256],
}

impl MulTable {
    pub fn constant(&self) -> u8 {
        self.constant
    }

    pub fn entries(&self) -> &[u8; 256] {
        &self.entries
    }

    #[inline(always)]
    pub fn get(&self, x: u8) -> u8 {
        self.entries[x as usize]
    }
}

impl std::fmt::Debug for MulTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MulTable({:#04x})", self.constant)
    }
}

pub fn build_mul_table(constant: u8) -> MulTable {
    let mut entries = [0u8; 256];
    for (x, e) in entries.iter_mut().enumerate() {
        *e = gf_mul(constant, x as u8);
    }
    MulTable { constant, entries }
}

/// Forward and inverse substitution tables.
#[derive(Clone, PartialEq, Eq)]
pub struct SBoxPair {
    sbox: [u8; 256],
    inv_sbox: [u8; 256],
}

impl SBoxPair {
    #[inline(always)]
    pub fn forward(&self, x: u8) -> u8 {
        self.sbox[x as usize]
    }

    #[inline(always)]
    pub fn inverse(&self, x: u8) -> u8 {
        self.inv_sbox[x as usize]
    }

    pub fn sbox(&self) -> &[u8; 256] {
        &self.sbox
    }

    pub fn inv_sbox(&self) -> &[u8; 256] {
        &self.inv_sbox
    }
}

impl std::fmt::Debug for SBoxPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SBoxPair").finish_non_exhaustive()
    }
}

/// `sbox[x] = affine(inverse(x))`; `inv_sbox` is its table inverse.
pub fn build_sbox() -> SBoxPair {
    let mut sbox = [0u8; 256];
    let mut inv_sbox = [0u8; 256];
    for x in 0..=255u8 {
        let s = affine_transform(gf_inverse(x));
        sbox[x as usize] = s;
        inv_sbox[s as usize] = x;
    }
    SBoxPair { sbox, inv_sbox }
}

/// Tables shared by the cipher, built on first access.
#[derive(Debug)]
pub struct Tables {
    pub sbox: SBoxPair,
    pub mul2: MulTable,
    pub mul3: MulTable,
    pub mul9: MulTable,
    pub mul11: MulTable,
    pub mul13: MulTable,
    pub mul14: MulTable,
}

impl Tables {
    fn build() -> Self {
        let sbox = build_sbox();
        assert_eq!(
            sbox.forward(0x00),
            0x63,
            "generated S-box failed its self-check"
        );
        Tables {
            sbox,
            mul2: build_mul_table(0x02),
            mul3: build_mul_table(0x03),
            mul9: build_mul_table(0x09),
            mul11: build_mul_table(0x0B),
            mul13: build_mul_table(0x0D),
            mul14: build_mul_table(0x0E),
        }
    }
}

static TABLES: OnceLock<Tables> = OnceLock::new();

/// The process-wide tables. The first call builds them; every later call
/// (from any thread) gets the same immutable instance.
pub fn tables() -> &'static Tables {
    TABLES.get_or_init(Tables::build)
}

/// 16x16 uppercase hex grid, row index = high nibble.
pub fn format_grid(table: &[u8; 256]) -> String {
    let mut out = String::with_capacity(16 * 52);
    out.push_str("    ");
    for col in 0..16 {
        out.push_str(&format!(" {col:X} "));
    }
    out.truncate(out.trim_end().len());
    out.push('\n');
    for row in 0..16 {
        out.push_str(&format!("{row:X}0 |"));
        for col in 0..16 {
            out.push_str(&format!("{:02X} ", table[row * 16 + col]));
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Carry-less product followed by polynomial long division by 0x11B.
    fn long_division_mul(a: u8, b: u8) -> u8 {
        let mut product = 0u16;
        for i in 0..8 {
            if (b >> i) & 1 == 1 {
                product ^= (a as u16) << i;
            }
        }
        for degree in (8..16).rev() {
            if (product >> degree) & 1 == 1 {
                product ^= 0x11B << (degree - 8);
            }
        }
        product as u8
    }

    #[test]
    fn xtime_examples() {
        assert_eq!(xtime(0x00), 0x00);
        assert_eq!(xtime(0x80), 0x1B);
        assert_eq!(xtime(0x57), 0xAE);
    }

    #[test]
    fn packed_xtime_matches_bytewise() {
        for b in 0..=255u8 {
            for lane in 0..4 {
                let w = (b as u32) << (8 * lane) | 0x5A5A_5A5A & !(0xFF << (8 * lane));
                let expected = u32::from_le_bytes(w.to_le_bytes().map(xtime));
                assert_eq!(xtime_packed(w), expected);
            }
        }
    }

    #[test]
    fn xtime_is_multiplication_by_two() {
        for x in 0..=255u8 {
            assert_eq!(xtime(x), gf_mul(0x02, x));
            assert_eq!(xtime(x), long_division_mul(0x02, x));
        }
    }

    #[test]
    fn gf_mul_examples() {
        for x in 0..=255u8 {
            assert_eq!(gf_mul(x, 0x01), x);
        }
        assert_eq!(gf_mul(0x02, 0xD4), 0xB3);
        assert_eq!(gf_mul(0x03, 0xBF), 0xDA);
        assert_eq!(long_division_mul(0x02, 0xD4), 0xB3);
        assert_eq!(long_division_mul(0x03, 0xBF), 0xDA);
    }

    #[test]
    fn gf_mul_exhaustive_against_long_division() {
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                let p = gf_mul(a, b);
                assert_eq!(p, long_division_mul(a, b), "{a:#04x} * {b:#04x}");
                assert_eq!(p, gf_mul(b, a));
            }
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(gf_inverse(0x00), 0x00);
        assert_eq!(gf_inverse(0x01), 0x01);
        assert_eq!(gf_inverse(0x53), 0xCA);
        for b in 1..=255u8 {
            assert_eq!(gf_mul(b, gf_inverse(b)), 1);
        }
    }

    #[test]
    fn affine_examples() {
        assert_eq!(affine_transform(0x00), 0x63);
        assert_eq!(affine_transform(0x01), 0x7C);
        for a in 0..=255u8 {
            for b in [0x00, 0x01, 0x5A, 0xA5, 0xFF, a.rotate_left(3)] {
                assert_eq!(
                    affine_transform(a ^ b),
                    affine_transform(a) ^ affine_transform(b) ^ 0x63
                );
            }
        }
    }

    #[test]
    fn sbox_examples() {
        let pair = build_sbox();
        assert_eq!(pair.forward(0x00), 0x63);
        assert_eq!(pair.forward(0x53), 0xED);
        assert_eq!(pair.inverse(pair.forward(0xAB)), 0xAB);
    }

    #[test]
    fn sbox_is_a_bijection() {
        let pair = build_sbox();
        let mut seen = [false; 256];
        for x in 0..=255u8 {
            let s = pair.forward(x);
            assert!(!seen[s as usize]);
            seen[s as usize] = true;
            assert_eq!(pair.inverse(s), x);
            assert_eq!(pair.forward(pair.inverse(x)), x);
        }
    }

    #[test]
    fn mul_tables() {
        let id = build_mul_table(0x01);
        for x in 0..=255u8 {
            assert_eq!(id.get(x), x);
        }
        assert_eq!(build_mul_table(0x02).get(0xD4), 0xB3);
        assert_eq!(build_mul_table(0x0E).get(0x01), 0x0E);
        for c in MIX_CONSTANTS {
            let t = build_mul_table(c);
            assert_eq!(t.constant(), c);
            assert_eq!(t.get(0), 0);
            assert_eq!(t.get(1), c);
            for x in 0..=255u8 {
                assert_eq!(t.get(x), long_division_mul(c, x));
            }
        }
    }

    #[test]
    fn shared_tables_match_fresh_build() {
        let t = tables();
        assert_eq!(t.sbox, build_sbox());
        assert_eq!(t.mul14, build_mul_table(0x0E));
        assert!(std::ptr::eq(t, tables()));
    }

    #[test]
    fn grid_layout() {
        let grid = format_grid(tables().sbox.sbox());
        let lines: Vec<&str> = grid.lines().collect();
        assert_eq!(lines.len(), 17);
        assert!(lines[1].starts_with("00 |63 7C 77 7B"));
        assert!(lines[5].starts_with("40 |09 83 2C 1A"));
        assert!(lines[16].ends_with("B0 54 BB 16"));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn distributes_over_xor(a: u8, b: u8, c: u8) {
                prop_assert_eq!(gf_mul(a, b ^ c), gf_mul(a, b) ^ gf_mul(a, c));
            }

            #[test]
            fn associative(a: u8, b: u8, c: u8) {
                prop_assert_eq!(gf_mul(gf_mul(a, b), c), gf_mul(a, gf_mul(b, c)));
            }
        }
    }
}
