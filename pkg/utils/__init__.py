# Utils package for the CPHD tracker
