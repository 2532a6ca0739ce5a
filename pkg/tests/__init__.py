"""
tvcone Test Suite
"""
