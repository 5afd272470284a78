//! Surface and target syntax: trees, tokenizer, parsers, printers.
//!
//! Printing then parsing is the identity on every tree; the printers insert
//! parentheses only where the grammar requires them.

pub mod ast;
mod lexer;
pub mod parser;
mod printer;
