"""
Static HTML figures for training and evaluation.
"""
