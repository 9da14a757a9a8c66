"""
Relevance judgements, ranking metrics, significance tests and reports.
"""
