"""
Test suite for the kmmeans clustering package
"""
