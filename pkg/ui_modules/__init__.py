"""Command-line front end package"""
