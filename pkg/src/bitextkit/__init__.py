"""Planning and data-preparation toolkit for many-to-many multilingual MT corpora."""

__version__ = "0.1.0"
