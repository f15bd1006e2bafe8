"""dc calculus modules package"""
