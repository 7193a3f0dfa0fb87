"""Sandpiper: a self-hostable workbench for qualitative coding of
conversational transcripts with LLM assistance.

Pipeline: ingest transcripts into canonical sessions, replace PII with
natural-reading surrogates, run schema-constrained annotation with a
validate-and-retry loop, then benchmark agreement between model runs and
human coders.
"""

__version__ = "0.1.0"
