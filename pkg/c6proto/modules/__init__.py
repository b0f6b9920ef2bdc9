"""Core modules package"""
