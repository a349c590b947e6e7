//! Write the data behind every figure into a directory (default
//! `figures/`), at reduced simulation length.
//!
//! ```not_rust
//! cargo run --release --example figures -- out
//! ```

use std::path::PathBuf;

use aloha_entropy::experiment::{emit_figure_data, Count, Figure, FigureRecipe, Params};

fn main() -> aloha_entropy::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    for figure in Figure::ALL {
        let mut recipe = FigureRecipe::new(figure);
        if figure == Figure::Fig3 {
            recipe.overrides = Params {
                slots: Some(Count(1_000_000)),
                ..Params::default()
            };
        }
        for path in emit_figure_data(&recipe, &dir)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
