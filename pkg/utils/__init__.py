"""Problem file and report helpers package"""
