//! Rank correlation, one-way ANOVA and Tukey HSD, generic over the float type.

mod anova;
mod correlation;
mod tukey;

pub use anova::{one_way_anova, Anova};
pub use correlation::{average_ranks, pearson, significance_stars, spearman, Spearman};
pub use tukey::{ptukey, qtukey, tukey_hsd, TukeyHsd, TukeyPair};
