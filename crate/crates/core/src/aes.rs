//! The AES-128 block primitive.
//!
//! A [`Block`] is viewed as a column-major 4x4 [`State`]
//! (`s[r][c] == block[4 * c + r]`). Encryption is an initial AddRoundKey,
//! nine full rounds, and a final round without MixColumns. MixColumns and its
//! inverse come in three interchangeable realizations selected by
//! [`MixStrategy`]; all three give identical bytes.

use std::fmt;
use std::str::FromStr;

use crate::count::{NoCount, OpCounter};
use crate::gf256::{gf_mul, tables, xtime, xtime_packed, SBoxPair, Tables};
use crate::UnknownName;

pub const BLOCK_LEN: usize = 16;
pub const KEY_LEN: usize = 16;
/// Number of rounds for a 128-bit key: nine full rounds plus the final one.
pub const ROUNDS: usize = 10;

pub type Block = [u8; BLOCK_LEN];
/// AES-128 cipher key. Other key sizes are not representable.
pub type Key = [u8; KEY_LEN];
pub type RoundKey = [u8; BLOCK_LEN];

/// How MixColumns multiplies by its matrix constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MixStrategy {
    /// Every matrix entry is a general field product (`gf_mul`).
    Math,
    /// Products are read from precomputed multiply-by-constant tables.
    Table,
    /// Products are expanded into sums of repeated doublings.
    Xtime,
}

impl MixStrategy {
    pub const ALL: [MixStrategy; 3] = [MixStrategy::Math, MixStrategy::Table, MixStrategy::Xtime];

    pub fn name(self) -> &'static str {
        match self {
            MixStrategy::Math => "math",
            MixStrategy::Table => "table",
            MixStrategy::Xtime => "xtime",
        }
    }
}

impl fmt::Display for MixStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MixStrategy {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MixStrategy::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownName::new("strategy", s))
    }
}

/// Row-by-column view of a block: `self.0[row][col]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct State(pub [[u8; 4]; 4]);

impl State {
    pub fn from_block(block: &Block) -> Self {
        let mut s = [[0u8; 4]; 4];
        for (i, &b) in block.iter().enumerate() {
            s[i % 4][i / 4] = b;
        }
        State(s)
    }

    pub fn to_block(&self) -> Block {
        let mut block = [0u8; BLOCK_LEN];
        for (i, b) in block.iter_mut().enumerate() {
            *b = self.0[i % 4][i / 4];
        }
        block
    }

    pub fn column(&self, c: usize) -> [u8; 4] {
        [self.0[0][c], self.0[1][c], self.0[2][c], self.0[3][c]]
    }

    pub fn set_column(&mut self, c: usize, col: [u8; 4]) {
        for (r, v) in col.into_iter().enumerate() {
            self.0[r][c] = v;
        }
    }
}

pub fn sub_bytes(state: State) -> State {
    substitute(state, &tables().sbox)
}

pub fn inv_sub_bytes(state: State) -> State {
    inv_substitute(state, &tables().sbox)
}

#[inline(always)]
fn substitute(state: State, sbox: &SBoxPair) -> State {
    State(state.0.map(|row| row.map(|b| sbox.forward(b))))
}

#[inline(always)]
fn inv_substitute(state: State, sbox: &SBoxPair) -> State {
    State(state.0.map(|row| row.map(|b| sbox.inverse(b))))
}

/// Row `r` rotates left by `r` positions.
#[inline]
pub fn shift_rows(state: State) -> State {
    let mut s = state.0;
    for (r, row) in s.iter_mut().enumerate() {
        row.rotate_left(r);
    }
    State(s)
}

#[inline]
pub fn inv_shift_rows(state: State) -> State {
    let mut s = state.0;
    for (r, row) in s.iter_mut().enumerate() {
        row.rotate_right(r);
    }
    State(s)
}

#[inline]
pub fn add_round_key(state: State, round_key: &RoundKey) -> State {
    let mut s = state.0;
    for (i, k) in round_key.iter().enumerate() {
        s[i % 4][i / 4] ^= k;
    }
    State(s)
}

/// Forward MixColumns matrix.
pub const MIX_MATRIX: [[u8; 4]; 4] = [
    [0x02, 0x03, 0x01, 0x01],
    [0x01, 0x02, 0x03, 0x01],
    [0x01, 0x01, 0x02, 0x03],
    [0x03, 0x01, 0x01, 0x02],
];

/// Inverse MixColumns matrix.
pub const INV_MIX_MATRIX: [[u8; 4]; 4] = [
    [0x0E, 0x0B, 0x0D, 0x09],
    [0x09, 0x0E, 0x0B, 0x0D],
    [0x0D, 0x09, 0x0E, 0x0B],
    [0x0B, 0x0D, 0x09, 0x0E],
];

/// One realization of MixColumns and its inverse on a single column.
trait MixColumn {
    fn forward<C: OpCounter>(col: [u8; 4], t: &Tables, counter: &mut C) -> [u8; 4];
    fn inverse<C: OpCounter>(col: [u8; 4], t: &Tables, counter: &mut C) -> [u8; 4];
}

/// Matrix-vector product with a general field multiplication per entry.
struct MathMix;

#[inline(always)]
fn matrix_product<C: OpCounter>(matrix: &[[u8; 4]; 4], col: [u8; 4], counter: &mut C) -> [u8; 4] {
    counter.gf_mul(16);
    matrix.map(|row| {
        row.iter()
            .zip(col)
            .fold(0u8, |acc, (&m, x)| acc ^ gf_mul(m, x))
    })
}

impl MixColumn for MathMix {
    #[inline(always)]
    fn forward<C: OpCounter>(col: [u8; 4], _: &Tables, counter: &mut C) -> [u8; 4] {
        matrix_product(&MIX_MATRIX, col, counter)
    }

    #[inline(always)]
    fn inverse<C: OpCounter>(col: [u8; 4], _: &Tables, counter: &mut C) -> [u8; 4] {
        matrix_product(&INV_MIX_MATRIX, col, counter)
    }
}

/// Products read from the multiply-by-constant tables; `01` terms are plain bytes.
struct TableMix;

impl MixColumn for TableMix {
    #[inline(always)]
    fn forward<C: OpCounter>(col: [u8; 4], t: &Tables, counter: &mut C) -> [u8; 4] {
        let [a0, a1, a2, a3] = col;
        counter.table_lookup(8);
        [
            t.mul2.get(a0) ^ t.mul3.get(a1) ^ a2 ^ a3,
            a0 ^ t.mul2.get(a1) ^ t.mul3.get(a2) ^ a3,
            a0 ^ a1 ^ t.mul2.get(a2) ^ t.mul3.get(a3),
            t.mul3.get(a0) ^ a1 ^ a2 ^ t.mul2.get(a3),
        ]
    }

    #[inline(always)]
    fn inverse<C: OpCounter>(col: [u8; 4], t: &Tables, counter: &mut C) -> [u8; 4] {
        let [a0, a1, a2, a3] = col;
        counter.table_lookup(16);
        [
            t.mul14.get(a0) ^ t.mul11.get(a1) ^ t.mul13.get(a2) ^ t.mul9.get(a3),
            t.mul9.get(a0) ^ t.mul14.get(a1) ^ t.mul11.get(a2) ^ t.mul13.get(a3),
            t.mul13.get(a0) ^ t.mul9.get(a1) ^ t.mul14.get(a2) ^ t.mul11.get(a3),
            t.mul11.get(a0) ^ t.mul13.get(a1) ^ t.mul9.get(a2) ^ t.mul14.get(a3),
        ]
    }
}

/// Doublings only, four bytes at a time with the column packed into a word.
///
/// Forward: `02·a ^ 03·b ^ c ^ d == xtime(a ^ b) ^ b ^ c ^ d`.
/// Inverse: the inverse matrix factors as the forward one times the
/// circulant `(05, 00, 04, 00)`, and `05·x ^ 04·y == x ^ xtime(xtime(x ^ y))`.
struct XtimeMix;

impl XtimeMix {
    #[inline(always)]
    fn forward_word(w: u32) -> u32 {
        let r1 = w.rotate_right(8);
        xtime_packed(w ^ r1) ^ r1 ^ w.rotate_right(16) ^ w.rotate_right(24)
    }
}

impl MixColumn for XtimeMix {
    #[inline(always)]
    fn forward<C: OpCounter>(col: [u8; 4], _: &Tables, counter: &mut C) -> [u8; 4] {
        counter.xtime(4);
        Self::forward_word(u32::from_le_bytes(col)).to_le_bytes()
    }

    #[inline(always)]
    fn inverse<C: OpCounter>(col: [u8; 4], _: &Tables, counter: &mut C) -> [u8; 4] {
        counter.xtime(12);
        let w = u32::from_le_bytes(col);
        let pre = w ^ xtime_packed(xtime_packed(w ^ w.rotate_right(16)));
        Self::forward_word(pre).to_le_bytes()
    }
}

pub fn mix_column_counted<C: OpCounter>(
    col: [u8; 4],
    strategy: MixStrategy,
    counter: &mut C,
) -> [u8; 4] {
    let t = tables();
    match strategy {
        MixStrategy::Math => MathMix::forward(col, t, counter),
        MixStrategy::Table => TableMix::forward(col, t, counter),
        MixStrategy::Xtime => XtimeMix::forward(col, t, counter),
    }
}

pub fn inv_mix_column_counted<C: OpCounter>(
    col: [u8; 4],
    strategy: MixStrategy,
    counter: &mut C,
) -> [u8; 4] {
    let t = tables();
    match strategy {
        MixStrategy::Math => MathMix::inverse(col, t, counter),
        MixStrategy::Table => TableMix::inverse(col, t, counter),
        MixStrategy::Xtime => XtimeMix::inverse(col, t, counter),
    }
}

/// MixColumns applied to one column.
pub fn mix_column(col: [u8; 4], strategy: MixStrategy) -> [u8; 4] {
    mix_column_counted(col, strategy, &mut NoCount)
}

pub fn inv_mix_column(col: [u8; 4], strategy: MixStrategy) -> [u8; 4] {
    inv_mix_column_counted(col, strategy, &mut NoCount)
}

#[inline(always)]
fn mix_columns_with<M: MixColumn, C: OpCounter>(
    state: State,
    t: &Tables,
    counter: &mut C,
) -> State {
    let mut out = state;
    for c in 0..4 {
        out.set_column(c, M::forward(state.column(c), t, counter));
    }
    out
}

#[inline(always)]
fn inv_mix_columns_with<M: MixColumn, C: OpCounter>(
    state: State,
    t: &Tables,
    counter: &mut C,
) -> State {
    let mut out = state;
    for c in 0..4 {
        out.set_column(c, M::inverse(state.column(c), t, counter));
    }
    out
}

pub fn mix_columns(state: State, strategy: MixStrategy) -> State {
    let t = tables();
    match strategy {
        MixStrategy::Math => mix_columns_with::<MathMix, _>(state, t, &mut NoCount),
        MixStrategy::Table => mix_columns_with::<TableMix, _>(state, t, &mut NoCount),
        MixStrategy::Xtime => mix_columns_with::<XtimeMix, _>(state, t, &mut NoCount),
    }
}

pub fn inv_mix_columns(state: State, strategy: MixStrategy) -> State {
    let t = tables();
    match strategy {
        MixStrategy::Math => inv_mix_columns_with::<MathMix, _>(state, t, &mut NoCount),
        MixStrategy::Table => inv_mix_columns_with::<TableMix, _>(state, t, &mut NoCount),
        MixStrategy::Xtime => inv_mix_columns_with::<XtimeMix, _>(state, t, &mut NoCount),
    }
}

/// The eleven round keys derived from one cipher key. `round_keys[0]` is
/// the key itself.
#[derive(Clone, PartialEq, Eq)]
pub struct RoundKeySchedule {
    round_keys: [RoundKey; ROUNDS + 1],
}

impl RoundKeySchedule {
    pub fn new(key: &Key) -> Self {
        expand_key(key)
    }

    pub fn round_key(&self, round: usize) -> &RoundKey {
        &self.round_keys[round]
    }

    pub fn round_keys(&self) -> &[RoundKey; ROUNDS + 1] {
        &self.round_keys
    }
}

impl fmt::Debug for RoundKeySchedule {
    // Round keys are key material; keep them out of logs.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RoundKeySchedule").finish_non_exhaustive()
    }
}

/// Standard AES-128 key expansion (RotWord, SubWord, Rcon) over 44 words.
pub fn expand_key(key: &Key) -> RoundKeySchedule {
    let sbox = &tables().sbox;
    let mut words = [[0u8; 4]; 4 * (ROUNDS + 1)];
    for (i, w) in words.iter_mut().take(4).enumerate() {
        w.copy_from_slice(&key[4 * i..4 * i + 4]);
    }
    let mut rcon = 0x01u8;
    for i in 4..words.len() {
        let mut temp = words[i - 1];
        if i % 4 == 0 {
            temp.rotate_left(1);
            temp = temp.map(|b| sbox.forward(b));
            temp[0] ^= rcon;
            rcon = xtime(rcon);
        }
        for j in 0..4 {
            words[i][j] = words[i - 4][j] ^ temp[j];
        }
    }

    let mut round_keys = [[0u8; BLOCK_LEN]; ROUNDS + 1];
    for (r, rk) in round_keys.iter_mut().enumerate() {
        for j in 0..4 {
            rk[4 * j..4 * j + 4].copy_from_slice(&words[4 * r + j]);
        }
    }
    RoundKeySchedule { round_keys }
}

pub fn encrypt_block_counted<C: OpCounter>(
    schedule: &RoundKeySchedule,
    block: &Block,
    strategy: MixStrategy,
    counter: &mut C,
) -> Block {
    match strategy {
        MixStrategy::Math => encrypt_with::<MathMix, C>(schedule, block, counter),
        MixStrategy::Table => encrypt_with::<TableMix, C>(schedule, block, counter),
        MixStrategy::Xtime => encrypt_with::<XtimeMix, C>(schedule, block, counter),
    }
}

pub fn decrypt_block_counted<C: OpCounter>(
    schedule: &RoundKeySchedule,
    block: &Block,
    strategy: MixStrategy,
    counter: &mut C,
) -> Block {
    match strategy {
        MixStrategy::Math => decrypt_with::<MathMix, C>(schedule, block, counter),
        MixStrategy::Table => decrypt_with::<TableMix, C>(schedule, block, counter),
        MixStrategy::Xtime => decrypt_with::<XtimeMix, C>(schedule, block, counter),
    }
}

// Kept out of line so every variant runs the same machine code per pass.
#[inline(never)]
fn encrypt_with<M: MixColumn, C: OpCounter>(
    schedule: &RoundKeySchedule,
    block: &Block,
    counter: &mut C,
) -> Block {
    let t = tables();
    let rk = &schedule.round_keys;
    let mut state = add_round_key(State::from_block(block), &rk[0]);
    for round_key in &rk[1..ROUNDS] {
        state = shift_rows(substitute(state, &t.sbox));
        state = mix_columns_with::<M, C>(state, t, counter);
        state = add_round_key(state, round_key);
    }
    state = shift_rows(substitute(state, &t.sbox));
    add_round_key(state, &rk[ROUNDS]).to_block()
}

#[inline(never)]
fn decrypt_with<M: MixColumn, C: OpCounter>(
    schedule: &RoundKeySchedule,
    block: &Block,
    counter: &mut C,
) -> Block {
    let t = tables();
    let rk = &schedule.round_keys;
    let mut state = add_round_key(State::from_block(block), &rk[ROUNDS]);
    for round_key in rk[1..ROUNDS].iter().rev() {
        state = inv_substitute(inv_shift_rows(state), &t.sbox);
        state = add_round_key(state, round_key);
        state = inv_mix_columns_with::<M, C>(state, t, counter);
    }
    state = inv_substitute(inv_shift_rows(state), &t.sbox);
    add_round_key(state, &rk[0]).to_block()
}

pub fn encrypt_block(schedule: &RoundKeySchedule, block: &Block, strategy: MixStrategy) -> Block {
    encrypt_block_counted(schedule, block, strategy, &mut NoCount)
}

pub fn decrypt_block(schedule: &RoundKeySchedule, block: &Block, strategy: MixStrategy) -> Block {
    decrypt_block_counted(schedule, block, strategy, &mut NoCount)
}

pub fn xor_block(a: &Block, b: &Block) -> Block {
    std::array::from_fn(|i| a[i] ^ b[i])
}
