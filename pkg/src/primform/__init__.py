"""Formal primitive forms and Frobenius structures for Calabi-Yau dg algebras."""
