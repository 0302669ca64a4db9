//! Core of a session-typed probabilistic process calculus: polynomials and
//! exact distributions, function symbols, process syntax and parsing, typing
//! with polynomial weights, exact operational semantics and equivalences.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod ast;
pub mod funsym;
pub mod kernel;
pub mod parser;
pub mod typing;
pub mod semantics;
pub mod equiv;
pub mod cryptolib;
