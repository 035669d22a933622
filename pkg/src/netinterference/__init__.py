"""Counterfactual estimation under network interference."""
