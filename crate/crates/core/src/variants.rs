//! Multiple-encryption constructions over the AES-128 primitive.
//!
//! | variant   | encrypt                       | decrypt                       |
//! |-----------|-------------------------------|-------------------------------|
//! | `single`  | `E_K1(P)`                     | `D_K1(C)`                     |
//! | `double`  | `E_K2(E_K1(P))`               | `D_K1(D_K2(C))`               |
//! | `triple2` | `E_K1(D_K2(E_K1(P)))`         | `D_K1(E_K2(D_K1(C)))`         |
//! | `aesx`    | `K3 ^ E_K2(P ^ K1)`           | `K1 ^ D_K2(C ^ K3)`           |
//! | `aes-exe` | `E_K3(K2 ^ E_K1(P))`          | `D_K1(K2 ^ D_K3(C))`          |
//!
//! Two-key triple encryption is encrypt-decrypt-encrypt, so `K1 == K2`
//! degenerates to single AES under `K1`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::aes::{
    decrypt_block_counted, encrypt_block_counted, xor_block, Block, Key, MixStrategy,
    RoundKeySchedule,
};
use crate::count::{NoCount, OpCounter};
use crate::UnknownName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VariantId {
    Single,
    Double,
    Triple2,
    Aesx,
    AesExe,
}

impl VariantId {
    pub const ALL: [VariantId; 5] = [
        VariantId::Single,
        VariantId::Double,
        VariantId::Triple2,
        VariantId::Aesx,
        VariantId::AesExe,
    ];

    /// Number of independent 16-byte keys the variant takes.
    pub fn arity(self) -> usize {
        match self {
            VariantId::Single => 1,
            VariantId::Double | VariantId::Triple2 => 2,
            VariantId::Aesx | VariantId::AesExe => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VariantId::Single => "single",
            VariantId::Double => "double",
            VariantId::Triple2 => "triple2",
            VariantId::Aesx => "aesx",
            VariantId::AesExe => "aes-exe",
        }
    }
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariantId {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VariantId::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownName::new("variant", s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("variant `{variant}` takes {} key(s), got {got}", variant.arity())]
pub struct ArityError {
    pub variant: VariantId,
    pub got: usize,
}

/// One to three keys, in `K1, K2, K3` order.
#[derive(Clone, PartialEq, Eq)]
pub struct VariantKeySet {
    pub k1: Key,
    pub k2: Option<Key>,
    pub k3: Option<Key>,
}

impl VariantKeySet {
    pub fn one(k1: Key) -> Self {
        VariantKeySet {
            k1,
            k2: None,
            k3: None,
        }
    }

    pub fn two(k1: Key, k2: Key) -> Self {
        VariantKeySet {
            k1,
            k2: Some(k2),
            k3: None,
        }
    }

    pub fn three(k1: Key, k2: Key, k3: Key) -> Self {
        VariantKeySet {
            k1,
            k2: Some(k2),
            k3: Some(k3),
        }
    }

    /// Builds a key set from a slice of one to three keys.
    pub fn from_slice(keys: &[Key]) -> Option<Self> {
        match *keys {
            [k1] => Some(Self::one(k1)),
            [k1, k2] => Some(Self::two(k1, k2)),
            [k1, k2, k3] => Some(Self::three(k1, k2, k3)),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        1 + self.k2.is_some() as usize + self.k3.is_some() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_vec(&self) -> Vec<Key> {
        std::iter::once(self.k1)
            .chain(self.k2)
            .chain(self.k3)
            .collect()
    }
}

impl fmt::Debug for VariantKeySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VariantKeySet({} keys)", self.len())
    }
}

#[derive(Clone)]
enum Keyed {
    Single(RoundKeySchedule),
    Double(RoundKeySchedule, RoundKeySchedule),
    Triple2(RoundKeySchedule, RoundKeySchedule),
    Aesx {
        pre: Key,
        inner: RoundKeySchedule,
        post: Key,
    },
    AesExe {
        first: RoundKeySchedule,
        mid: Key,
        last: RoundKeySchedule,
    },
}

/// A variant with its key schedules expanded once, for bulk use.
#[derive(Clone)]
pub struct VariantContext {
    variant: VariantId,
    keyed: Keyed,
}

impl fmt::Debug for VariantContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VariantContext")
            .field("variant", &self.variant)
            .finish_non_exhaustive()
    }
}

impl VariantContext {
    pub fn new(variant: VariantId, keys: &VariantKeySet) -> Result<Self, ArityError> {
        if keys.len() != variant.arity() {
            return Err(ArityError {
                variant,
                got: keys.len(),
            });
        }
        let sched = RoundKeySchedule::new;
        // Arity was checked above, so the optional keys are present.
        let k2 = || keys.k2.expect("arity checked");
        let k3 = || keys.k3.expect("arity checked");
        let keyed = match variant {
            VariantId::Single => Keyed::Single(sched(&keys.k1)),
            VariantId::Double => Keyed::Double(sched(&keys.k1), sched(&k2())),
            VariantId::Triple2 => Keyed::Triple2(sched(&keys.k1), sched(&k2())),
            VariantId::Aesx => Keyed::Aesx {
                pre: keys.k1,
                inner: sched(&k2()),
                post: k3(),
            },
            VariantId::AesExe => Keyed::AesExe {
                first: sched(&keys.k1),
                mid: k2(),
                last: sched(&k3()),
            },
        };
        Ok(VariantContext { variant, keyed })
    }

    pub fn variant(&self) -> VariantId {
        self.variant
    }

    pub fn encrypt(&self, block: &Block, strategy: MixStrategy) -> Block {
        self.encrypt_counted(block, strategy, &mut NoCount)
    }

    pub fn decrypt(&self, block: &Block, strategy: MixStrategy) -> Block {
        self.decrypt_counted(block, strategy, &mut NoCount)
    }

    pub fn encrypt_counted<C: OpCounter>(
        &self,
        p: &Block,
        strategy: MixStrategy,
        counter: &mut C,
    ) -> Block {
        let mut e =
            |ks: &RoundKeySchedule, b: &Block| encrypt_block_counted(ks, b, strategy, counter);
        match &self.keyed {
            Keyed::Single(k1) => e(k1, p),
            Keyed::Double(k1, k2) => {
                let inner = e(k1, p);
                e(k2, &inner)
            }
            Keyed::Triple2(k1, k2) => {
                let first = e(k1, p);
                let mid = decrypt_block_counted(k2, &first, strategy, counter);
                encrypt_block_counted(k1, &mid, strategy, counter)
            }
            Keyed::Aesx { pre, inner, post } => xor_block(post, &e(inner, &xor_block(p, pre))),
            Keyed::AesExe { first, mid, last } => {
                let whitened = xor_block(mid, &e(first, p));
                e(last, &whitened)
            }
        }
    }

    pub fn decrypt_counted<C: OpCounter>(
        &self,
        c: &Block,
        strategy: MixStrategy,
        counter: &mut C,
    ) -> Block {
        let mut d =
            |ks: &RoundKeySchedule, b: &Block| decrypt_block_counted(ks, b, strategy, counter);
        match &self.keyed {
            Keyed::Single(k1) => d(k1, c),
            Keyed::Double(k1, k2) => {
                let inner = d(k2, c);
                d(k1, &inner)
            }
            Keyed::Triple2(k1, k2) => {
                let first = d(k1, c);
                let mid = encrypt_block_counted(k2, &first, strategy, counter);
                decrypt_block_counted(k1, &mid, strategy, counter)
            }
            Keyed::Aesx { pre, inner, post } => xor_block(pre, &d(inner, &xor_block(c, post))),
            Keyed::AesExe { first, mid, last } => {
                let whitened = xor_block(mid, &d(last, c));
                d(first, &whitened)
            }
        }
    }
}

pub fn variant_context(
    variant: VariantId,
    keys: &VariantKeySet,
) -> Result<VariantContext, ArityError> {
    VariantContext::new(variant, keys)
}

/// One-shot encryption. Key schedules live only for the duration of the call.
pub fn variant_encrypt(
    variant: VariantId,
    keys: &VariantKeySet,
    p: &Block,
    strategy: MixStrategy,
) -> Result<Block, ArityError> {
    Ok(VariantContext::new(variant, keys)?.encrypt(p, strategy))
}

pub fn variant_decrypt(
    variant: VariantId,
    keys: &VariantKeySet,
    c: &Block,
    strategy: MixStrategy,
) -> Result<Block, ArityError> {
    Ok(VariantContext::new(variant, keys)?.decrypt(c, strategy))
}
