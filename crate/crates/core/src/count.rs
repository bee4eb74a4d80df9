//! Field-operation counters for the instrumented cipher path.
//!
//! The cipher is generic over [`OpCounter`]. [`NoCount`] compiles every hook
//! away, so the plain and counting paths run the same code and produce the
//! same bytes.

pub trait OpCounter {
    fn gf_mul(&mut self, n: u64);
    fn xtime(&mut self, n: u64);
    /// Lookups into a multiply-by-constant table. S-box lookups are not
    /// counted: every strategy does the same number of them.
    fn table_lookup(&mut self, n: u64);
}

#[derive(Debug, Default, Clone, Copy)]
pub struct NoCount;

impl OpCounter for NoCount {
    #[inline(always)]
    fn gf_mul(&mut self, _: u64) {}
    #[inline(always)]
    fn xtime(&mut self, _: u64) {}
    #[inline(always)]
    fn table_lookup(&mut self, _: u64) {}
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpCounts {
    pub gf_mul: u64,
    pub xtime: u64,
    pub table_lookups: u64,
}

impl OpCounter for OpCounts {
    #[inline]
    fn gf_mul(&mut self, n: u64) {
        self.gf_mul += n;
    }
    #[inline]
    fn xtime(&mut self, n: u64) {
        self.xtime += n;
    }
    #[inline]
    fn table_lookup(&mut self, n: u64) {
        self.table_lookups += n;
    }
}
