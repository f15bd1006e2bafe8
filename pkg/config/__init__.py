"""Settings package"""
