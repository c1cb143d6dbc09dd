"""
Test suite for the aerial-LTE simulator.

Unit tests per simulation module plus end-to-end experiment runs on small layouts.
"""
