//! Encrypted-bit circuits: words, comparators, adders, selection and popcount.

mod arith;
mod bit;
mod esp;
mod logic;
mod word;

pub use arith::{abs_diff, abs_value, add_words, mul_words, sub_words, twos_complement};
pub use esp::{
    popcount_esp, popcount_esp_width, prefix_sums, prefix_sums_width, weighted_sum_esp, PrefixStrategy,
};
pub use logic::{
    blind_mux, blind_swap, eq_word, eq_word_masked, gt_compare, lt_compare, split_compare, sub_compare,
    SplitCompare,
};
pub use word::{bits_for, EncWord, EncWordRepr, Operand, PlainWord};

pub(crate) use word::same_width as same_width_pub;

use crate::error::Result;
use crate::eval::Evaluator;
use crate::she::Ciphertext;

/// The Star gate on ciphertexts; see [`Evaluator::star`].
pub fn star(ev: &mut Evaluator, s: &Ciphertext, x: &Ciphertext, y: &Ciphertext) -> Result<Ciphertext> {
    ev.star(s, x, y)
}
