'''Package holding configuration and data files of the pra project'''
