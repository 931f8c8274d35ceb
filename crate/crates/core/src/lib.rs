//! Figurative-language detection and literalization for dialog corpora.
//!
//! The pipeline: parse an idiom lexicon, clean its glosses and expand its
//! templates ([`lexicon`], [`inflection`]); compile the surfaces into a
//! matcher and find figurative utterances, optionally merged with external
//! metaphor scores ([`detector`]); rewrite matched spans with their glosses
//! ([`literalizer`]). [`corpus`] and [`metrics`] cover prevalence statistics
//! and before/after evaluation of dialog systems.
//!
//! ```
//! use figlit::{detector, inflection::InflectionTables, lexicon, literalizer};
//!
//! let entries = lexicon::parse_lexicon("face the music\t(idiomatic) bear the consequences\tidiom\n".as_bytes(), "lex").unwrap();
//! let dict = lexicon::build_dictionary(entries, &InflectionTables::bundled()).unwrap().dictionary;
//! let matcher = detector::build_matcher(&dict).unwrap();
//!
//! let text = "Time to face the music.";
//! let spans = detector::detect_idioms("u1", text, &matcher);
//! let out = literalizer::literalize_utterance("u1", text, &spans, &dict).unwrap();
//! assert_eq!(out.literalized, "Time to bear the consequences.");
//! ```

pub mod corpus;
pub mod detector;
pub mod error;
pub mod fixtures;
pub mod inflection;
pub mod lexicon;
pub mod literalizer;
pub mod metrics;

pub use error::{Error, Result};
